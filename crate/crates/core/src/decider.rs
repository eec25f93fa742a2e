//! Termination decision for eventually periodic adversaries.
//!
//! Under an EPA with prefix length `c` and cycle length `l`, the future of a
//! run depends only on the current node states and the round's phase: `j`
//! before `c`, `c + (j - c) mod l` afterwards. The configuration space is
//! finite, so stepping forward either clears every message bit or revisits
//! a `(states, phase)` pair, after which the run repeats forever.
//!
//! Keys must include the phase. Two rounds with equal states but different
//! phases see different delays and can diverge.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::EpaSchedule;
use crate::graph::{EdgeSlot, Graph};
use crate::protocol::{initial_configuration, step, Configuration, NodeState, Trace, TraceFile, TraceVerdict};

/// Position of round `j` in the schedule: `j` if `j < c`, else
/// `c + (j - c) mod l`.
pub fn phase(j: usize, c: usize, l: usize) -> usize {
    assert!(l >= 1, "cycle length must be positive");
    if j < c {
        j
    } else {
        c + (j - c) % l
    }
}

/// Canonical encoding of a state vector and a phase. Byte order sorts by
/// phase first, then node by node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigKey(Vec<u8>);

impl ConfigKey {
    pub fn new(states: &[NodeState], phase: usize) -> Self {
        let set_bytes = states.len().div_ceil(8);
        let mut bytes = Vec::with_capacity(8 + states.len() * (1 + 2 * set_bytes));
        bytes.extend_from_slice(&(phase as u64).to_be_bytes());
        for s in states {
            bytes.push(u8::from(s.has_message));
            bytes.extend_from_slice(&s.sources.bits().to_le_bytes()[..set_bytes]);
            bytes.extend_from_slice(&s.destinations.bits().to_le_bytes()[..set_bytes]);
        }
        ConfigKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// First round in which nobody holds the message.
    Terminates { t_min: usize },
    /// The configuration at `entry + period` equals the one at `entry`,
    /// phase included.
    NonTerminating { entry: usize, period: usize },
}

impl Verdict {
    pub fn is_terminating(&self) -> bool {
        matches!(self, Verdict::Terminates { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    /// Distinct `(states, phase)` keys visited.
    pub explored: u64,
    /// Rounds `0..=t_min`, or `0..=entry + period`.
    pub witness: Trace,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("schedule violates the finite delay property on {0:?}")]
    InvalidSchedule(Vec<EdgeSlot>),
    #[error("schedule covers {got} slots but the graph has {expected}")]
    SlotCount { expected: usize, got: usize },
    #[error("explored {explored} configurations without a verdict")]
    CapExhausted { explored: u64 },
}

#[derive(Copy, Clone, Debug)]
pub struct DecideOptions {
    /// Practical exploration cap. The effective cap is the smaller of this
    /// and [`state_space_bound`].
    pub max_explored: u64,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { max_explored: 1 << 24 }
    }
}

/// `(2^{2|V|} + 1)^{|V|} · 2^{|E|} · (c + l)`: an upper bound on the number
/// of distinct configurations under an EPA with parameters `(c, l)`.
pub fn state_space_bound(graph: &Graph, c: usize, l: usize) -> BigUint {
    let v = graph.node_count() as u32;
    let per_node = (BigUint::from(1u8) << (2 * v as usize)) + 1u8;
    per_node.pow(v) * (BigUint::from(1u8) << graph.edge_count()) * BigUint::from(c + l)
}

/// Checks the schedule shape shared by [`decide`] and the brute-force
/// oracle.
pub fn check_schedule(graph: &Graph, schedule: &EpaSchedule) -> Result<(), DecideError> {
    if schedule.slot_count() != graph.slot_count() {
        return Err(DecideError::SlotCount {
            expected: graph.slot_count(),
            got: schedule.slot_count(),
        });
    }
    let report = schedule.validate_finite_delay(graph);
    if !report.is_valid() {
        return Err(DecideError::InvalidSchedule(report.violating));
    }
    Ok(())
}

pub fn decide(graph: &Graph, schedule: &EpaSchedule) -> Result<Decision, DecideError> {
    decide_with(graph, schedule, DecideOptions::default())
}

pub fn decide_with(graph: &Graph, schedule: &EpaSchedule, options: DecideOptions) -> Result<Decision, DecideError> {
    check_schedule(graph, schedule)?;
    let c = schedule.stabilisation_round();
    let l = schedule.cycle_length();
    let bound = state_space_bound(graph, c, l);
    let cap = if bound < BigUint::from(options.max_explored) {
        u64::try_from(&bound).expect("smaller than a u64")
    } else {
        options.max_explored
    };

    let mut seen: HashMap<ConfigKey, usize> = HashMap::new();
    let mut configurations: Vec<Configuration> = vec![initial_configuration(graph)];
    loop {
        let current = configurations.last().unwrap();
        let j = current.round;
        if current.is_terminated() {
            return Ok(Decision {
                verdict: Verdict::Terminates { t_min: j },
                explored: seen.len() as u64,
                witness: Trace {
                    configurations,
                    verdict: TraceVerdict::Terminated(j),
                },
            });
        }
        let key = ConfigKey::new(&current.states, phase(j, c, l));
        if let Some(&first) = seen.get(&key) {
            return Ok(Decision {
                verdict: Verdict::NonTerminating {
                    entry: first,
                    period: j - first,
                },
                explored: seen.len() as u64,
                witness: Trace {
                    configurations,
                    verdict: TraceVerdict::RepeatDetected { first, second: j },
                },
            });
        }
        if seen.len() as u64 >= cap {
            return Err(DecideError::CapExhausted {
                explored: seen.len() as u64,
            });
        }
        seen.insert(key, j);
        let next = step(graph, current, schedule.map_for_round(j + 1)).expect("schedule sized for graph");
        configurations.push(next);
    }
}

/// Per-condition result of the periodic-infinite-schedule check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IpisReport {
    /// The delays are periodic with period `period` from round `c + 1` on.
    pub eventually_periodic: bool,
    /// Minimal period of the schedule's cycle.
    pub period: usize,
    /// `S(c, u) = S(c + l, u)` for every node.
    pub states_repeat: bool,
    /// `l mod period = 0`.
    pub length_multiple_of_period: bool,
    /// Some round in `c..c + l` has a transmission.
    pub has_transmission: bool,
}

impl IpisReport {
    pub fn all(&self) -> bool {
        self.eventually_periodic && self.states_repeat && self.length_multiple_of_period && self.has_transmission
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IpisError {
    #[error("cycle length must be positive")]
    ZeroLength,
    #[error("trace ends at round {have}, need round {needed}")]
    TraceTooShort { needed: usize, have: usize },
}

/// Checks whether `trace`, produced under `schedule`, is periodic infinite
/// with stabilisation round `c` and cycle length `l`.
pub fn check_ipis(trace: &Trace, schedule: &EpaSchedule, c: usize, l: usize) -> Result<IpisReport, IpisError> {
    if l == 0 {
        return Err(IpisError::ZeroLength);
    }
    let have = trace.len().saturating_sub(1);
    if have < c + l {
        return Err(IpisError::TraceTooShort { needed: c + l, have });
    }
    let period = schedule.minimal_period();
    let at = |j: usize| &trace.configurations[j];
    Ok(IpisReport {
        eventually_periodic: schedule.stabilisation_round() <= c,
        period,
        states_repeat: at(c).states == at(c + l).states,
        length_multiple_of_period: l.is_multiple_of(period),
        has_transmission: (c..c + l).any(|j| !at(j).transmissions.is_empty()),
    })
}

/// Verdict file: `{"result": ..., "t_min" | "entry" + "period", "explored": n}`
/// with an optional witness trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictFile {
    pub result: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    pub explored: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<TraceFile>,
}

impl VerdictFile {
    pub fn from_verdict(verdict: &Verdict, explored: u64) -> Self {
        let mut file = VerdictFile {
            result: String::new(),
            t_min: None,
            entry: None,
            period: None,
            explored,
            error: None,
            witness: None,
        };
        match *verdict {
            Verdict::Terminates { t_min } => {
                file.result = "terminates".into();
                file.t_min = Some(t_min);
            }
            Verdict::NonTerminating { entry, period } => {
                file.result = "non_terminating".into();
                file.entry = Some(entry);
                file.period = Some(period);
            }
        }
        file
    }

    pub fn from_decision(decision: &Decision, with_witness: bool) -> Self {
        let mut file = Self::from_verdict(&decision.verdict, decision.explored);
        if with_witness {
            file.witness = Some(TraceFile::from_trace(&decision.witness));
        }
        file
    }

    pub fn from_error(error: &DecideError) -> Self {
        let explored = match error {
            DecideError::CapExhausted { explored } => *explored,
            _ => 0,
        };
        VerdictFile {
            result: "error".into(),
            t_min: None,
            entry: None,
            period: None,
            explored,
            error: Some(error.to_string()),
            witness: None,
        }
    }

    pub fn verdict(&self) -> Option<Verdict> {
        match self.result.as_str() {
            "terminates" => Some(Verdict::Terminates { t_min: self.t_min? }),
            "non_terminating" => Some(Verdict::NonTerminating {
                entry: self.entry?,
                period: self.period?,
            }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{make_basic_triangle, DelayMap, DelayModel};
    use crate::graph::families::*;
    use crate::protocol::run;

    #[test]
    fn phases() {
        assert_eq!(phase(5, 3, 6), 5);
        assert_eq!(phase(9, 3, 6), 3);
        assert_eq!(phase(0, 0, 3), 0);
        assert_eq!(phase(7, 0, 3), 1);
    }

    #[test]
    fn basic_strategy_does_not_terminate() {
        let g = triangle();
        let d = decide(&g, &make_basic_triangle()).unwrap();
        // S(2) = S(8) at the same phase is the first repeat
        assert_eq!(d.verdict, Verdict::NonTerminating { entry: 2, period: 6 });
        assert_eq!(d.witness.len(), 9);
        assert_eq!(d.witness.configurations[2].states, d.witness.configurations[8].states);
        assert_eq!(d.explored, 8);

        let long = crate::run(&g, &crate::DelayModel::Epa(make_basic_triangle()), 9).unwrap();

        let report = check_ipis(&long, &make_basic_triangle(), 3, 6).unwrap();
        assert!(report.all(), "{report:?}");
        assert_eq!(report.period, 3);

        let report = check_ipis(&long, &make_basic_triangle(), 3, 4).unwrap();
        assert!(!report.length_multiple_of_period);
        assert!(!report.all());
    }

    #[test]
    fn terminating_instances() {
        let d = decide(&path(2), &EpaSchedule::always_allow(2)).unwrap();
        assert_eq!(d.verdict, Verdict::Terminates { t_min: 2 });
        let g = single_node();
        let d = decide(&g, &EpaSchedule::always_allow(0)).unwrap();
        assert_eq!(d.verdict, Verdict::Terminates { t_min: 1 });
    }

    #[test]
    fn terminated_trace_has_no_transmissions() {
        let g = path(2);
        let model = DelayModel::AlwaysAllow;
        let mut trace = run(&g, &model, 10).unwrap();
        trace.extend(&g, &model, 2).unwrap();
        let report = check_ipis(&trace, &EpaSchedule::always_allow(2), 2, 1).unwrap();
        assert!(report.states_repeat);
        assert!(!report.has_transmission);
        assert!(!report.all());
        assert_eq!(
            check_ipis(&trace, &EpaSchedule::always_allow(2), 4, 1),
            Err(IpisError::TraceTooShort { needed: 5, have: 4 })
        );
    }

    #[test]
    fn rejects_blocked_forever() {
        let g = path(2);
        let s = EpaSchedule::new(2, vec![], vec![DelayMap::from_bits(2, 0b01)]).unwrap();
        assert!(matches!(decide(&g, &s), Err(DecideError::InvalidSchedule(v)) if v.len() == 1));
    }

    #[test]
    fn cap_is_reported() {
        let g = triangle();
        let opts = DecideOptions { max_explored: 4 };
        assert_eq!(
            decide_with(&g, &make_basic_triangle(), opts),
            Err(DecideError::CapExhausted { explored: 4 })
        );
    }

    #[test]
    fn bound_values() {
        // (2^2 + 1)^1 * 2^0 * (0 + 1)
        assert_eq!(state_space_bound(&single_node(), 0, 1), BigUint::from(5u8));
        // (2^6 + 1)^3 * 2^3 * 3
        assert_eq!(
            state_space_bound(&triangle(), 0, 3),
            BigUint::from(65u64.pow(3) * 8 * 3)
        );
    }

    #[test]
    fn key_distinguishes_phase() {
        let states = vec![NodeState::IDLE; 3];
        assert_ne!(ConfigKey::new(&states, 0), ConfigKey::new(&states, 1));
        assert!(ConfigKey::new(&states, 0) < ConfigKey::new(&states, 1));
    }

    #[test]
    fn verdict_file_shapes() {
        let v = VerdictFile::from_verdict(&Verdict::NonTerminating { entry: 3, period: 6 }, 9);
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"result":"non_terminating","entry":3,"period":6,"explored":9}"#
        );
        assert_eq!(v.verdict(), Some(Verdict::NonTerminating { entry: 3, period: 6 }));
        let e = VerdictFile::from_error(&DecideError::CapExhausted { explored: 4 });
        assert_eq!(e.result, "error");
        assert_eq!(e.verdict(), None);
    }
}
