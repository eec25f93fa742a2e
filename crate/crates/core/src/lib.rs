//! Simulation and termination analysis for round-delayed amnesiac flooding.
//!
//! A single message floods a graph in synchronous rounds while an adversary
//! blocks individual directed edge slots. Blocked senders retry until they
//! deliver or hear the message back from that neighbour. The crate provides
//!
//! - [`graph`]: validated topologies and the structural queries used below;
//! - [`protocol`]: the round semantics, run loop and trace property checks;
//! - [`adversary`]: delay models, including the cyclic non-termination
//!   strategy and bounded random delays;
//! - [`decider`]: termination decision for eventually periodic adversaries;
//! - [`oracle`]: brute-force schedule enumeration and an independent decider.

pub mod adversary;
pub mod decider;
pub mod graph;
pub mod oracle;
pub mod protocol;

pub use adversary::{AdversaryError, AdversarySpec, DelayMap, DelayModel, EpaSchedule};
pub use decider::{check_ipis, decide, phase, Decision, Verdict};
pub use graph::{Edge, EdgeSlot, Graph, GraphError, GraphSpec, NodeId, NodeSet};
pub use protocol::{initial_configuration, run, step, Configuration, NodeState, Trace, TraceVerdict};
