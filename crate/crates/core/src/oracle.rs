//! Brute-force cross-checks.
//!
//! [`enumerate_epa`] lists every cycle table of a small graph, and
//! [`brute_decide`] re-derives termination with its own naive simulator
//! (adjacency matrix, per-node boolean vectors, linear-scan repeat check).
//! It shares only the graph and schedule types with the main engine and
//! [`crate::decider`], so agreement between the two is meaningful.
//! [`epis_search`] looks for a non-terminating periodic schedule.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{AdversarySpec, DelayMap, EpaSchedule};
use crate::decider::{check_schedule, phase, state_space_bound, DecideError, DecideOptions, Verdict, VerdictFile};
use crate::graph::Graph;

pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub graph: Graph,
    pub max_cycle_length: usize,
    /// Schedules are enumerated with an empty prefix; only 0 is accepted.
    pub stabilisation: usize,
    /// Skip tables that block some slot in every round of the cycle.
    pub require_valid: bool,
    /// Maximum number of schedules the enumeration may emit.
    pub budget: u64,
}

impl SearchSpec {
    pub fn new(graph: Graph, max_cycle_length: usize) -> Self {
        SearchSpec {
            graph,
            max_cycle_length,
            stabilisation: 0,
            require_valid: true,
            budget: DEFAULT_BUDGET,
        }
    }

    /// Closed-form number of emitted schedules: per cycle length `l`,
    /// `(2^l - 1)^{2|E|}` valid tables or `2^{2|E|·l}` tables overall.
    pub fn schedule_count(&self) -> BigUint {
        let slots = self.graph.slot_count() as u32;
        (1..=self.max_cycle_length)
            .map(|l| {
                if self.require_valid {
                    ((BigUint::from(1u8) << l) - 1u8).pow(slots)
                } else {
                    BigUint::from(1u8) << (slots as usize * l)
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("enumeration would emit {required} schedules; budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error("enumeration supports at most 64 slots per map, graph has {0}")]
    TooManySlots(usize),
    #[error("maximum cycle length must be at least 1")]
    ZeroCycleLength,
    #[error("only an empty prefix is enumerated, got stabilisation {0}")]
    NonZeroStabilisation(usize),
    #[error(transparent)]
    Decide(#[from] DecideError),
}

/// Lexicographic enumeration of cycle tables: shorter cycles first, and
/// within one length the first map is most significant. Each map is read
/// as an integer whose bit `i` blocks slot `i`.
#[derive(Debug, Clone)]
pub struct EpaEnumerator {
    slots: usize,
    max_len: usize,
    require_valid: bool,
    digits: Vec<u64>,
    exhausted: bool,
}

impl EpaEnumerator {
    fn digit_limit(&self) -> u64 {
        // all slots blocked
        if self.slots == 64 {
            u64::MAX
        } else {
            (1u64 << self.slots) - 1
        }
    }

    fn is_valid(&self) -> bool {
        let all_blocked = self.digits.iter().fold(self.digit_limit(), |acc, d| acc & d);
        all_blocked == 0
    }

    /// Moves to the next table of any validity.
    fn advance(&mut self) {
        let max = self.digit_limit();
        for d in self.digits.iter_mut().rev() {
            if *d < max {
                *d += 1;
                return;
            }
            *d = 0;
        }
        // wrapped: next length
        if self.digits.len() == self.max_len {
            self.exhausted = true;
        } else {
            self.digits = vec![0; self.digits.len() + 1];
        }
    }

    fn current(&self) -> EpaSchedule {
        let cycle = self
            .digits
            .iter()
            .map(|&d| DelayMap::from_bits(self.slots, d))
            .collect();
        EpaSchedule::new(self.slots, Vec::new(), cycle).expect("well-formed")
    }
}

impl Iterator for EpaEnumerator {
    type Item = EpaSchedule;

    fn next(&mut self) -> Option<EpaSchedule> {
        while !self.exhausted {
            let emit = !self.require_valid || self.is_valid();
            let schedule = emit.then(|| self.current());
            self.advance();
            if schedule.is_some() {
                return schedule;
            }
        }
        None
    }
}

/// All cycle tables of lengths `1..=max_cycle_length` for `spec.graph`.
/// Fails up front if the closed-form count exceeds the budget.
pub fn enumerate_epa(spec: &SearchSpec) -> Result<EpaEnumerator, SearchError> {
    if spec.max_cycle_length == 0 {
        return Err(SearchError::ZeroCycleLength);
    }
    if spec.stabilisation != 0 {
        return Err(SearchError::NonZeroStabilisation(spec.stabilisation));
    }
    let slots = spec.graph.slot_count();
    if slots > 64 {
        return Err(SearchError::TooManySlots(slots));
    }
    let count = spec.schedule_count();
    if count > BigUint::from(spec.budget) {
        return Err(SearchError::BudgetExceeded {
            required: count.to_string(),
            budget: spec.budget,
        });
    }
    Ok(EpaEnumerator {
        slots,
        max_len: spec.max_cycle_length,
        require_valid: spec.require_valid,
        digits: vec![0],
        exhausted: false,
    })
}

#[derive(Clone, PartialEq, Eq)]
struct NaiveNode {
    message: bool,
    from: Vec<bool>,
    to: Vec<bool>,
}

/// Termination verdict by plain simulation with a linear list of visited
/// `(states, phase)` pairs.
pub fn brute_decide(graph: &Graph, schedule: &EpaSchedule) -> Result<Verdict, DecideError> {
    check_schedule(graph, schedule)?;
    let n = graph.node_count();
    let c = schedule.stabilisation_round();
    let l = schedule.cycle_length();
    let limit = {
        let bound = state_space_bound(graph, c, l);
        let practical = DecideOptions::default().max_explored;
        if bound < BigUint::from(practical) {
            u64::try_from(&bound).unwrap() as usize
        } else {
            practical as usize
        }
    };

    let mut adjacent = vec![vec![false; n]; n];
    for e in graph.edges() {
        let (a, b) = e.endpoints();
        adjacent[a.index()][b.index()] = true;
        adjacent[b.index()][a.index()] = true;
    }
    let blocked = |round: usize, from: usize, to: usize| {
        let slot = graph
            .slot_index(crate::graph::NodeId(from), crate::graph::NodeId(to))
            .unwrap();
        schedule.is_blocked(round, slot)
    };

    let idle = NaiveNode {
        message: false,
        from: vec![false; n],
        to: vec![false; n],
    };
    let mut nodes = vec![idle.clone(); n];
    let g0 = graph.source().index();
    nodes[g0].message = true;
    nodes[g0].to = adjacent[g0].clone();

    let mut visited: Vec<(Vec<NaiveNode>, usize, usize)> = Vec::new();
    let mut round = 0;
    loop {
        if nodes.iter().all(|s| !s.message) {
            return Ok(Verdict::Terminates { t_min: round });
        }
        let ph = phase(round, c, l);
        if let Some((_, _, first)) = visited.iter().find(|(s, p, _)| *p == ph && *s == nodes) {
            return Ok(Verdict::NonTerminating {
                entry: *first,
                period: round - first,
            });
        }
        if visited.len() >= limit {
            return Err(DecideError::CapExhausted {
                explored: visited.len() as u64,
            });
        }
        visited.push((nodes.clone(), ph, round));

        let next_round = round + 1;
        let mut next = vec![idle.clone(); n];
        for u in 0..n {
            for v in 0..n {
                next[u].from[v] = adjacent[v][u] && nodes[v].message && nodes[v].to[u] && !blocked(next_round, v, u);
            }
        }
        for u in 0..n {
            let received = next[u].from.iter().any(|&b| b);
            let pending: Vec<bool> = (0..n)
                .map(|v| nodes[u].message && nodes[u].to[v] && blocked(next_round, u, v))
                .collect();
            next[u].to = if received {
                (0..n).map(|v| adjacent[u][v] && !next[u].from[v]).collect()
            } else {
                pending.clone()
            };
            next[u].message = received || pending.iter().any(|&b| b);
        }
        nodes = next;
        round = next_round;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Schedules evaluated, up to and including the witness.
    pub searched: u64,
    pub found: Option<(EpaSchedule, Verdict)>,
}

const CHUNK: usize = 4096;

/// First enumerated schedule that [`brute_decide`] reports as
/// non-terminating. A miss only covers the enumerated bound.
///
/// Chunks are evaluated in parallel; the result is the lowest index, so the
/// outcome does not depend on thread scheduling.
pub fn epis_search(spec: &SearchSpec) -> Result<SearchOutcome, SearchError> {
    let mut schedules = enumerate_epa(spec)?;
    let mut searched = 0u64;
    loop {
        let chunk: Vec<EpaSchedule> = schedules.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            return Ok(SearchOutcome { searched, found: None });
        }
        let len = chunk.len() as u64;
        let verdicts: Vec<Result<Verdict, DecideError>> =
            chunk.par_iter().map(|s| brute_decide(&spec.graph, s)).collect();
        for (i, (schedule, verdict)) in chunk.into_iter().zip(verdicts).enumerate() {
            let verdict = verdict?;
            if !verdict.is_terminating() {
                return Ok(SearchOutcome {
                    searched: searched + i as u64 + 1,
                    found: Some((schedule, verdict)),
                });
            }
        }
        searched += len;
    }
}

/// `{"searched": n, "found": bool, "witness": <adversary>, "verdict": {...}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub searched: u64,
    pub found: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<AdversarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictFile>,
}

impl SearchReport {
    pub fn from_outcome(graph: &Graph, outcome: &SearchOutcome) -> Self {
        match &outcome.found {
            Some((schedule, verdict)) => SearchReport {
                searched: outcome.searched,
                found: true,
                witness: Some(AdversarySpec::from_epa(graph, schedule)),
                verdict: Some(VerdictFile::from_verdict(verdict, 0)),
            },
            None => SearchReport {
                searched: outcome.searched,
                found: false,
                witness: None,
                verdict: None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::make_basic_triangle;
    use crate::decider::decide;
    use crate::graph::families::*;

    fn spec(g: Graph, l: usize) -> SearchSpec {
        SearchSpec::new(g, l)
    }

    #[test]
    fn enumeration_counts() {
        // with one map, validity leaves only the all-open table
        assert_eq!(enumerate_epa(&spec(path(2), 1)).unwrap().count(), 1);
        assert_eq!(enumerate_epa(&spec(triangle(), 1)).unwrap().count(), 1);
        let mut all = spec(triangle(), 1);
        all.require_valid = false;
        assert_eq!(enumerate_epa(&all).unwrap().count(), 64);
        let mut all = spec(path(2), 2);
        all.require_valid = false;
        assert_eq!(enumerate_epa(&all).unwrap().count(), 4 + 16);
        assert_eq!(all.schedule_count(), BigUint::from(20u8));
        // (2^2 - 1)^4 + (2^1 - 1)^4
        assert_eq!(spec(path(3), 2).schedule_count(), BigUint::from(82u8));
        assert_eq!(enumerate_epa(&spec(path(3), 2)).unwrap().count(), 82);
        assert_eq!(enumerate_epa(&spec(single_node(), 3)).unwrap().count(), 3);
    }

    #[test]
    fn enumeration_is_duplicate_free_and_sorted() {
        let all: Vec<_> = enumerate_epa(&spec(path(3), 2)).unwrap().collect();
        let keys: Vec<(usize, Vec<DelayMap>)> = all.iter().map(|s| (s.cycle_length(), s.cycle().to_vec())).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| {
            a.0.cmp(&b.0).then_with(|| {
                let bits = |m: &DelayMap| (0..m.len()).map(|i| (m.is_blocked(i) as u64) << i).sum::<u64>();
                a.1.iter().map(bits).cmp(b.1.iter().map(bits))
            })
        });
        sorted.dedup();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn includes_basic_strategy() {
        let d0 = make_basic_triangle();
        let mut s = spec(triangle(), 3);
        s.budget = 1 << 20;
        assert!(enumerate_epa(&s).unwrap().any(|x| x == d0));
    }

    #[test]
    fn budget_is_enforced() {
        let mut s = spec(complete(4), 3);
        assert!(matches!(enumerate_epa(&s), Err(SearchError::BudgetExceeded { .. })));
        s.max_cycle_length = 0;
        assert_eq!(enumerate_epa(&s).unwrap_err(), SearchError::ZeroCycleLength);
    }

    #[test]
    fn brute_agrees_on_reference_instances() {
        assert_eq!(
            brute_decide(&triangle(), &make_basic_triangle()).unwrap(),
            decide(&triangle(), &make_basic_triangle()).unwrap().verdict
        );
        assert_eq!(
            brute_decide(&path(2), &EpaSchedule::always_allow(2)).unwrap(),
            Verdict::Terminates { t_min: 2 }
        );
        let g = path(3);
        let mut count = 0;
        for s in enumerate_epa(&spec(g.clone(), 2)).unwrap() {
            assert!(brute_decide(&g, &s).unwrap().is_terminating());
            count += 1;
        }
        assert_eq!(count, 82);
    }

    #[test]
    fn searches() {
        let found = epis_search(&spec(triangle(), 3)).unwrap();
        assert!(found.found.is_some());
        let none = epis_search(&spec(path(3), 2)).unwrap();
        assert_eq!(
            none,
            SearchOutcome {
                searched: 82,
                found: None
            }
        );
    }
}
