//! JSON form of a [`Trace`]. Sets are written sorted ascending.

use serde::{Deserialize, Serialize};

use super::{Configuration, NodeState, Trace, TraceVerdict};
use crate::graph::{EdgeSlot, NodeId, NodeSet, MAX_NODES};

/// `[M, [s...], [dest...]]`
pub type StateRecord = (u8, Vec<usize>, Vec<usize>);
/// `[v, [a, b]]`
pub type SlotRecord = (usize, [usize; 2]);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub j: usize,
    pub states: Vec<StateRecord>,
    pub tx: Vec<SlotRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceVerdictFile {
    Terminated { t_min: usize },
    CapReached,
    RepeatDetected { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    pub rounds: Vec<RoundRecord>,
    pub verdict: TraceVerdictFile,
}

pub(crate) fn slot_record(slot: &EdgeSlot) -> SlotRecord {
    let (a, b) = slot.edge.endpoints();
    (slot.sender.index(), [a.index(), b.index()])
}

pub(crate) fn slot_from_record(&(v, [a, b]): &SlotRecord) -> Result<EdgeSlot, String> {
    if a == b || (v != a && v != b) || a.max(b) >= MAX_NODES {
        return Err(format!("malformed slot [{v}, [{a}, {b}]]"));
    }
    Ok(EdgeSlot::new(NodeId(v), NodeId(if v == a { b } else { a })))
}

fn set_from(ids: &[usize]) -> Result<NodeSet, String> {
    ids.iter()
        .map(|&i| {
            if i < MAX_NODES {
                Ok(NodeId(i))
            } else {
                Err(format!("node id {i} out of range"))
            }
        })
        .collect()
}

impl From<TraceVerdict> for TraceVerdictFile {
    fn from(v: TraceVerdict) -> Self {
        match v {
            TraceVerdict::Terminated(t_min) => TraceVerdictFile::Terminated { t_min },
            TraceVerdict::CapReached => TraceVerdictFile::CapReached,
            TraceVerdict::RepeatDetected { first, second } => TraceVerdictFile::RepeatDetected { first, second },
        }
    }
}

impl From<TraceVerdictFile> for TraceVerdict {
    fn from(v: TraceVerdictFile) -> Self {
        match v {
            TraceVerdictFile::Terminated { t_min } => TraceVerdict::Terminated(t_min),
            TraceVerdictFile::CapReached => TraceVerdict::CapReached,
            TraceVerdictFile::RepeatDetected { first, second } => TraceVerdict::RepeatDetected { first, second },
        }
    }
}

impl RoundRecord {
    pub fn from_configuration(c: &Configuration) -> Self {
        RoundRecord {
            j: c.round,
            states: c
                .states
                .iter()
                .map(|s| {
                    (
                        u8::from(s.has_message),
                        s.sources.iter().map(NodeId::index).collect(),
                        s.destinations.iter().map(NodeId::index).collect(),
                    )
                })
                .collect(),
            tx: c.transmissions.iter().map(slot_record).collect(),
        }
    }

    pub fn to_configuration(&self) -> Result<Configuration, String> {
        let states = self
            .states
            .iter()
            .map(|(m, s, d)| {
                if *m > 1 {
                    return Err(format!("message bit must be 0 or 1, got {m}"));
                }
                Ok(NodeState::new(*m == 1, set_from(s)?, set_from(d)?))
            })
            .collect::<Result<_, _>>()?;
        let mut transmissions = self.tx.iter().map(slot_from_record).collect::<Result<Vec<_>, _>>()?;
        transmissions.sort();
        Ok(Configuration {
            round: self.j,
            states,
            transmissions,
        })
    }
}

impl TraceFile {
    pub fn from_trace(trace: &Trace) -> Self {
        TraceFile {
            rounds: trace
                .configurations
                .iter()
                .map(RoundRecord::from_configuration)
                .collect(),
            verdict: trace.verdict.into(),
        }
    }

    pub fn to_trace(&self) -> Result<Trace, String> {
        let configurations = self
            .rounds
            .iter()
            .map(RoundRecord::to_configuration)
            .collect::<Result<Vec<_>, _>>()?;
        for (j, c) in configurations.iter().enumerate() {
            if c.round != j {
                return Err(format!("round {} found at position {j}", c.round));
            }
        }
        Ok(Trace {
            configurations,
            verdict: self.verdict.into(),
        })
    }
}
