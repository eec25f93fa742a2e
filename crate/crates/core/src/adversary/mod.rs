//! Delay adversaries.
//!
//! A delay decision is made per round and per [`EdgeSlot`]: `true` in a
//! [`DelayMap`] means the slot is blocked that round. Rounds are 1-based
//! here; round 0 has no delays.

mod cyclic;
mod spec;

use std::borrow::Cow;
use std::collections::BTreeMap;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::graph::{families, EdgeSlot, Graph};
use crate::protocol::Configuration;

pub use cyclic::{make_cyclic_nontermination, CycleOrientation, CyclicAdversary};
pub use spec::{AdversarySpec, SlotRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("delays are defined from round 1 on")]
    RoundZero,
    #[error("slot {0} is not a slot of the graph")]
    ForeignSlot(String),
    #[error("delay map does not cover slot {0}")]
    MissingSlot(EdgeSlot),
    #[error("delay map covers {got} slots but the graph has {expected}")]
    SlotCount { expected: usize, got: usize },
    #[error("cycle length must be at least 1")]
    EmptyCycle,
    #[error("declared {field} = {declared} but {actual} maps are given")]
    LengthMismatch {
        field: &'static str,
        declared: usize,
        actual: usize,
    },
    #[error("{0:?} is not a simple cycle of the graph")]
    InvalidCycle(Vec<usize>),
    #[error("graph has no cycle")]
    NoCycle,
    #[error("no node of the cycle ever receives the message")]
    NoTrigger,
    #[error("basic strategy needs the triangle {{{{0,1}},{{0,2}},{{1,2}}}} with source 0")]
    NotTriangle,
}

/// Blocked/allowed decision for every slot of one round, indexed like
/// [`Graph::edge_slots`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DelayMap {
    blocked: Vec<bool>,
}

impl DelayMap {
    pub fn all_open(slot_count: usize) -> Self {
        DelayMap {
            blocked: vec![false; slot_count],
        }
    }

    pub fn all_blocked(slot_count: usize) -> Self {
        DelayMap {
            blocked: vec![true; slot_count],
        }
    }

    pub fn from_flags(blocked: Vec<bool>) -> Self {
        DelayMap { blocked }
    }

    /// Bit `i` of `bits` is the decision for slot `i`. `slot_count <= 64`.
    pub fn from_bits(slot_count: usize, bits: u64) -> Self {
        assert!(slot_count <= 64);
        DelayMap {
            blocked: (0..slot_count).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    /// Blocks exactly the listed slots.
    pub fn from_blocked<I>(graph: &Graph, blocked: I) -> Result<Self, AdversaryError>
    where
        I: IntoIterator<Item = EdgeSlot>,
    {
        let mut map = DelayMap::all_open(graph.slot_count());
        for slot in blocked {
            let i = graph
                .index_of_slot(slot)
                .ok_or_else(|| AdversaryError::ForeignSlot(slot.to_string()))?;
            map.blocked[i] = true;
        }
        Ok(map)
    }

    /// Builds a map from an explicit `slot -> blocked` table, which must
    /// cover exactly the graph's slots.
    pub fn from_entries(graph: &Graph, entries: &BTreeMap<EdgeSlot, bool>) -> Result<Self, AdversaryError> {
        if let Some(slot) = entries.keys().find(|s| graph.index_of_slot(**s).is_none()) {
            return Err(AdversaryError::ForeignSlot(slot.to_string()));
        }
        let blocked = graph
            .edge_slots()
            .iter()
            .map(|s| entries.get(s).copied().ok_or(AdversaryError::MissingSlot(*s)))
            .collect::<Result<_, _>>()?;
        Ok(DelayMap { blocked })
    }

    pub fn len(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocked.is_empty()
    }

    #[inline]
    pub fn is_blocked(&self, slot: usize) -> bool {
        self.blocked[slot]
    }

    pub fn set(&mut self, slot: usize, blocked: bool) {
        self.blocked[slot] = blocked;
    }

    pub fn blocked_slots(&self, graph: &Graph) -> Vec<EdgeSlot> {
        graph
            .edge_slots()
            .iter()
            .zip(&self.blocked)
            .filter_map(|(s, b)| b.then_some(*s))
            .collect()
    }
}

/// An eventually periodic delay table: `prefix` covers rounds `1..=c`, then
/// `cycle` repeats with period `l` forever.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EpaSchedule {
    slot_count: usize,
    prefix: Vec<DelayMap>,
    cycle: Vec<DelayMap>,
}

/// Outcome of the finite delay check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteDelayReport {
    /// Slots that are blocked in every map of the cycle.
    pub violating: Vec<EdgeSlot>,
}

impl FiniteDelayReport {
    pub fn is_valid(&self) -> bool {
        self.violating.is_empty()
    }
}

impl EpaSchedule {
    pub fn new(slot_count: usize, prefix: Vec<DelayMap>, cycle: Vec<DelayMap>) -> Result<Self, AdversaryError> {
        if cycle.is_empty() {
            return Err(AdversaryError::EmptyCycle);
        }
        if let Some(bad) = prefix.iter().chain(&cycle).find(|m| m.len() != slot_count) {
            return Err(AdversaryError::SlotCount {
                expected: slot_count,
                got: bad.len(),
            });
        }
        Ok(EpaSchedule {
            slot_count,
            prefix,
            cycle,
        })
    }

    pub fn for_graph(graph: &Graph, prefix: Vec<DelayMap>, cycle: Vec<DelayMap>) -> Result<Self, AdversaryError> {
        Self::new(graph.slot_count(), prefix, cycle)
    }

    /// `c = 0, l = 1`, nothing blocked.
    pub fn always_allow(slot_count: usize) -> Self {
        EpaSchedule {
            slot_count,
            prefix: Vec::new(),
            cycle: vec![DelayMap::all_open(slot_count)],
        }
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    /// `c`: the number of rounds before the periodic part.
    pub fn stabilisation_round(&self) -> usize {
        self.prefix.len()
    }

    /// `l`
    pub fn cycle_length(&self) -> usize {
        self.cycle.len()
    }

    pub fn prefix(&self) -> &[DelayMap] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[DelayMap] {
        &self.cycle
    }

    /// Delay decisions for round `j >= 1`.
    pub fn map_for_round(&self, j: usize) -> &DelayMap {
        assert!(j >= 1, "round 0 has no delays");
        let c = self.prefix.len();
        if j <= c {
            &self.prefix[j - 1]
        } else {
            &self.cycle[(j - 1 - c) % self.cycle.len()]
        }
    }

    pub fn is_blocked(&self, j: usize, slot: usize) -> bool {
        self.map_for_round(j).is_blocked(slot)
    }

    /// Every slot must be open at least once per cycle; prefix runs are
    /// finite by construction.
    pub fn validate_finite_delay(&self, graph: &Graph) -> FiniteDelayReport {
        let violating = graph
            .edge_slots()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.cycle.iter().all(|m| m.is_blocked(*i)))
            .map(|(_, s)| *s)
            .collect();
        FiniteDelayReport { violating }
    }

    /// Same check as [`EpaSchedule::validate_finite_delay`] without naming
    /// the slots.
    pub fn is_finite_delay(&self) -> bool {
        (0..self.slot_count).all(|i| self.cycle.iter().any(|m| !m.is_blocked(i)))
    }

    /// Smallest `p` dividing `l` such that the cycle repeats every `p`
    /// rounds.
    pub fn minimal_period(&self) -> usize {
        let l = self.cycle.len();
        (1..=l)
            .filter(|p| l.is_multiple_of(*p))
            .find(|&p| (0..l).all(|k| self.cycle[k] == self.cycle[(k + p) % l]))
            .unwrap_or(l)
    }

    /// Length of the longest run of consecutive blocked rounds for any
    /// slot, or `None` if some slot is blocked forever.
    pub fn longest_blocked_run(&self) -> Option<usize> {
        let c = self.prefix.len();
        let l = self.cycle.len();
        let mut longest = 0;
        for slot in 0..self.slot_count {
            if self.cycle.iter().all(|m| m.is_blocked(slot)) {
                return None;
            }
            // two passes over the cycle catch runs that wrap around
            let mut run = 0;
            for j in 1..=c + 2 * l {
                if self.is_blocked(j, slot) {
                    run += 1;
                    longest = longest.max(run);
                } else {
                    run = 0;
                }
            }
        }
        Some(longest)
    }
}

/// An evaluable delay function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DelayModel {
    AlwaysAllow,
    Epa(EpaSchedule),
    /// Always-allow until the cycle is reached, then a rotating schedule
    /// along the cycle. Reads the run's history to find the trigger round.
    Cyclic(CyclicAdversary),
}

impl DelayModel {
    /// All delay decisions of round `j >= 1`. `history` holds the
    /// configurations of rounds `0..j`.
    pub fn delays_for_round<'a>(
        &'a self,
        graph: &Graph,
        j: usize,
        history: &[Configuration],
    ) -> Result<Cow<'a, DelayMap>, AdversaryError> {
        if j == 0 {
            return Err(AdversaryError::RoundZero);
        }
        match self {
            DelayModel::AlwaysAllow => Ok(Cow::Owned(DelayMap::all_open(graph.slot_count()))),
            DelayModel::Epa(schedule) => {
                if schedule.slot_count() != graph.slot_count() {
                    return Err(AdversaryError::SlotCount {
                        expected: graph.slot_count(),
                        got: schedule.slot_count(),
                    });
                }
                Ok(Cow::Borrowed(schedule.map_for_round(j)))
            }
            DelayModel::Cyclic(adv) => Ok(Cow::Owned(adv.delays_for_round(graph, j, history))),
        }
    }

    /// `d(j, v, e)`: whether `slot` is blocked in round `j`.
    pub fn evaluate(
        &self,
        graph: &Graph,
        j: usize,
        slot: EdgeSlot,
        history: &[Configuration],
    ) -> Result<bool, AdversaryError> {
        let i = graph
            .index_of_slot(slot)
            .ok_or_else(|| AdversaryError::ForeignSlot(slot.to_string()))?;
        Ok(self.delays_for_round(graph, j, history)?.is_blocked(i))
    }
}

/// The three-round strategy on the triangle (Source = 0, A = 1, B = 2):
/// round `j` opens only `{Source, A}` when `j mod 3 = 1`, only `{A, B}` when
/// `j mod 3 = 2`, and only `{Source, B}` when `j mod 3 = 0`.
pub fn make_basic_triangle() -> EpaSchedule {
    let g = families::triangle();
    let open_only = |a: usize, b: usize| {
        let flags = g
            .edge_slots()
            .iter()
            .map(|s| {
                let (x, y) = s.edge.endpoints();
                (x.index(), y.index()) != (a, b)
            })
            .collect();
        DelayMap::from_flags(flags)
    };
    let cycle = vec![open_only(0, 1), open_only(1, 2), open_only(0, 2)];
    EpaSchedule::for_graph(&g, Vec::new(), cycle).expect("well-formed")
}

/// Like [`make_basic_triangle`] but checks that `graph` is the canonical
/// triangle.
pub fn make_basic_triangle_for(graph: &Graph) -> Result<EpaSchedule, AdversaryError> {
    if *graph != families::triangle() {
        return Err(AdversaryError::NotTriangle);
    }
    Ok(make_basic_triangle())
}

/// Random delays where no slot stays blocked for more than `bound`
/// consecutive rounds, materialised over `horizon` rounds followed by an
/// all-open cycle of length 1.
///
/// The stream is SplitMix64 with its state initialised to `seed`. Rounds
/// `1..=horizon` are filled in order, slots in [`Graph::edge_slots`] order
/// within a round. A slot whose current blocked run already has length
/// `bound` is opened without drawing; otherwise one value is drawn and the
/// slot is blocked iff its top bit is set.
pub fn make_b_bounded_random(graph: &Graph, bound: usize, seed: u64, horizon: usize) -> EpaSchedule {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let slots = graph.slot_count();
    let mut run = vec![0usize; slots];
    let prefix = (0..horizon)
        .map(|_| {
            let flags = (0..slots)
                .map(|i| {
                    let blocked = run[i] < bound && rng.next_u64() >> 63 == 1;
                    run[i] = if blocked { run[i] + 1 } else { 0 };
                    blocked
                })
                .collect();
            DelayMap::from_flags(flags)
        })
        .collect();
    EpaSchedule::new(slots, prefix, vec![DelayMap::all_open(slots)]).expect("well-formed")
}
