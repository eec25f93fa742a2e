//! Adversary file format.
//!
//! ```json
//! {"type": "epa", "c": 0, "l": 3, "prefix": [], "cycle": [[[0, [0, 2]], ...], ...]}
//! {"type": "always_allow"}
//! {"type": "cyclic", "cycle": [0, 1, 2]}
//! {"type": "b_bounded", "bound": 2, "seed": 7, "horizon": 64}
//! ```
//!
//! Each EPA map lists its blocked slots as `[sender, [a, b]]`, sorted;
//! unlisted slots are open.

use serde::{Deserialize, Serialize};

use super::{make_b_bounded_random, AdversaryError, CyclicAdversary, DelayMap, DelayModel, EpaSchedule};
use crate::graph::{Graph, NodeId};
use crate::protocol::trace_json::{slot_from_record, slot_record};

pub use crate::protocol::trace_json::SlotRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdversarySpec {
    AlwaysAllow,
    Epa {
        c: usize,
        l: usize,
        prefix: Vec<Vec<SlotRecord>>,
        cycle: Vec<Vec<SlotRecord>>,
    },
    Cyclic {
        cycle: Vec<usize>,
    },
    BBounded {
        bound: usize,
        seed: u64,
        horizon: usize,
    },
}

fn map_records(graph: &Graph, map: &DelayMap) -> Vec<SlotRecord> {
    map.blocked_slots(graph).iter().map(slot_record).collect()
}

fn map_from_records(graph: &Graph, records: &[SlotRecord]) -> Result<DelayMap, AdversaryError> {
    let slots = records
        .iter()
        .map(slot_from_record)
        .collect::<Result<Vec<_>, _>>()
        .map_err(AdversaryError::ForeignSlot)?;
    DelayMap::from_blocked(graph, slots)
}

impl AdversarySpec {
    pub fn from_epa(graph: &Graph, schedule: &EpaSchedule) -> Self {
        AdversarySpec::Epa {
            c: schedule.stabilisation_round(),
            l: schedule.cycle_length(),
            prefix: schedule.prefix().iter().map(|m| map_records(graph, m)).collect(),
            cycle: schedule.cycle().iter().map(|m| map_records(graph, m)).collect(),
        }
    }

    pub fn from_model(graph: &Graph, model: &DelayModel) -> Self {
        match model {
            DelayModel::AlwaysAllow => AdversarySpec::AlwaysAllow,
            DelayModel::Epa(s) => Self::from_epa(graph, s),
            DelayModel::Cyclic(adv) => AdversarySpec::Cyclic {
                cycle: adv.cycle().iter().map(|v| v.index()).collect(),
            },
        }
    }

    /// Interprets the file against `graph`.
    pub fn to_model(&self, graph: &Graph) -> Result<DelayModel, AdversaryError> {
        Ok(match self {
            AdversarySpec::AlwaysAllow => DelayModel::AlwaysAllow,
            AdversarySpec::Epa { c, l, prefix, cycle } => {
                if *c != prefix.len() {
                    return Err(AdversaryError::LengthMismatch {
                        field: "c",
                        declared: *c,
                        actual: prefix.len(),
                    });
                }
                if *l != cycle.len() {
                    return Err(AdversaryError::LengthMismatch {
                        field: "l",
                        declared: *l,
                        actual: cycle.len(),
                    });
                }
                let prefix = prefix
                    .iter()
                    .map(|m| map_from_records(graph, m))
                    .collect::<Result<_, _>>()?;
                let cycle = cycle
                    .iter()
                    .map(|m| map_from_records(graph, m))
                    .collect::<Result<_, _>>()?;
                DelayModel::Epa(EpaSchedule::for_graph(graph, prefix, cycle)?)
            }
            AdversarySpec::Cyclic { cycle } => {
                let cycle: Vec<NodeId> = cycle.iter().map(|&v| NodeId(v)).collect();
                DelayModel::Cyclic(CyclicAdversary::new(graph, &cycle)?)
            }
            AdversarySpec::BBounded { bound, seed, horizon } => {
                DelayModel::Epa(make_b_bounded_random(graph, *bound, *seed, *horizon))
            }
        })
    }

    /// The adversary as an explicit eventually periodic table. Cyclic
    /// strategies are resolved by simulating up to their trigger round.
    pub fn to_epa(&self, graph: &Graph) -> Result<EpaSchedule, AdversaryError> {
        match self.to_model(graph)? {
            DelayModel::AlwaysAllow => Ok(EpaSchedule::always_allow(graph.slot_count())),
            DelayModel::Epa(s) => Ok(s),
            DelayModel::Cyclic(adv) => Ok(adv.to_epa(graph)?.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::make_basic_triangle;
    use crate::graph::families::*;

    #[test]
    fn basic_strategy_file() {
        let g = triangle();
        let spec = AdversarySpec::from_epa(&g, &make_basic_triangle());
        let json = serde_json::to_string(&spec).unwrap();
        // round 1 blocks everything except {0,1}
        assert!(json.starts_with(
            r#"{"type":"epa","c":0,"l":3,"prefix":[],"cycle":[[[0,[0,2]],[1,[1,2]],[2,[0,2]],[2,[1,2]]],"#
        ));
        let back: AdversarySpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_epa(&g).unwrap(), make_basic_triangle());
    }

    #[test]
    fn other_kinds() {
        let g = cycle(5);
        let spec: AdversarySpec = serde_json::from_str(r#"{"type":"cyclic","cycle":[0,1,2,3,4]}"#).unwrap();
        let epa = spec.to_epa(&g).unwrap();
        assert_eq!(epa.cycle_length(), 5);
        let spec: AdversarySpec = serde_json::from_str(r#"{"type":"always_allow"}"#).unwrap();
        assert_eq!(spec.to_epa(&g).unwrap(), EpaSchedule::always_allow(10));
        let spec: AdversarySpec =
            serde_json::from_str(r#"{"type":"b_bounded","bound":1,"seed":3,"horizon":4}"#).unwrap();
        assert_eq!(spec.to_epa(&g).unwrap().stabilisation_round(), 4);
    }

    #[test]
    fn malformed_files() {
        let g = triangle();
        let bad_len = r#"{"type":"epa","c":1,"l":1,"prefix":[],"cycle":[[]]}"#;
        let spec: AdversarySpec = serde_json::from_str(bad_len).unwrap();
        assert!(matches!(spec.to_model(&g), Err(AdversaryError::LengthMismatch { .. })));
        let bad_slot = r#"{"type":"epa","c":0,"l":1,"prefix":[],"cycle":[[[0,[1,2]]]]}"#;
        let spec: AdversarySpec = serde_json::from_str(bad_slot).unwrap();
        assert!(matches!(spec.to_model(&g), Err(AdversaryError::ForeignSlot(_))));
        let empty = r#"{"type":"epa","c":0,"l":0,"prefix":[],"cycle":[]}"#;
        let spec: AdversarySpec = serde_json::from_str(empty).unwrap();
        assert_eq!(spec.to_model(&g), Err(AdversaryError::EmptyCycle));
        let spec: AdversarySpec = serde_json::from_str(r#"{"type":"cyclic","cycle":[0,1]}"#).unwrap();
        assert!(spec.to_model(&g).is_err());
    }
}
