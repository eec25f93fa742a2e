//! Round semantics of delayed amnesiac flooding.
//!
//! Each node holds a message bit, the set of neighbours it received from in
//! the current round, and the set of neighbours it still has to deliver to.
//! A round `j -> j + 1` consumes the adversary's delay decisions for round
//! `j + 1`:
//!
//! 1. every node holding the message sends to each destination whose slot
//!    is open; blocked destinations stay pending;
//! 2. a node that received from a non-empty set `s` replaces its
//!    destinations with `N(u) \ s`, dropping whatever was pending;
//! 3. otherwise it keeps only its pending destinations;
//! 4. the message bit is set iff the node received or still has
//!    destinations.
//!
//! Round 0 has no transmissions; the first delay decisions are those of
//! round 1.

pub mod invariants;
pub(crate) mod trace_json;

use thiserror::Error;

use crate::adversary::{AdversaryError, DelayMap, DelayModel};
use crate::graph::{EdgeSlot, Graph, NodeId, NodeSet};

pub use trace_json::{RoundRecord, TraceFile, TraceVerdictFile};

/// `(M, s, dest)` for one node in one round.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeState {
    pub has_message: bool,
    pub sources: NodeSet,
    pub destinations: NodeSet,
}

impl NodeState {
    pub const IDLE: NodeState = NodeState {
        has_message: false,
        sources: NodeSet::EMPTY,
        destinations: NodeSet::EMPTY,
    };

    pub fn new(has_message: bool, sources: NodeSet, destinations: NodeSet) -> Self {
        NodeState {
            has_message,
            sources,
            destinations,
        }
    }
}

impl std::fmt::Debug for NodeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {:?}, {:?})",
            u8::from(self.has_message),
            self.sources,
            self.destinations
        )
    }
}

/// Full system state of one round plus the transmissions that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub round: usize,
    pub states: Vec<NodeState>,
    /// Sorted by sender, then receiver.
    pub transmissions: Vec<EdgeSlot>,
}

impl Configuration {
    /// No node holds the message.
    pub fn is_terminated(&self) -> bool {
        self.states.iter().all(|s| !s.has_message)
    }

    pub fn all_destinations_empty(&self) -> bool {
        self.states.iter().all(|s| s.destinations.is_empty())
    }

    pub fn state(&self, v: NodeId) -> &NodeState {
        &self.states[v.index()]
    }

    pub fn transmitted(&self, sender: NodeId, receiver: NodeId) -> bool {
        self.transmissions
            .binary_search(&EdgeSlot::new(sender, receiver))
            .is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("delay map covers {got} slots but the graph has {expected}")]
    DelayMapSize { expected: usize, got: usize },
    #[error("configuration has {got} node states but the graph has {expected} nodes")]
    StateCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("adversary failed at round {round}: {source}")]
    Adversary { round: usize, source: AdversaryError },
}

/// Source holds the message and targets all its neighbours; everyone else
/// is idle.
pub fn initial_configuration(graph: &Graph) -> Configuration {
    let mut states = vec![NodeState::IDLE; graph.node_count()];
    let g0 = graph.source();
    states[g0.index()] = NodeState::new(true, NodeSet::EMPTY, graph.neighbours(g0));
    Configuration {
        round: 0,
        states,
        transmissions: Vec::new(),
    }
}

/// Computes round `prev.round + 1` under the delay decisions `delays` of
/// that round.
pub fn step(graph: &Graph, prev: &Configuration, delays: &DelayMap) -> Result<Configuration, StepError> {
    let n = graph.node_count();
    if delays.len() != graph.slot_count() {
        return Err(StepError::DelayMapSize {
            expected: graph.slot_count(),
            got: delays.len(),
        });
    }
    if prev.states.len() != n {
        return Err(StepError::StateCount {
            expected: n,
            got: prev.states.len(),
        });
    }

    let mut received = vec![NodeSet::EMPTY; n];
    let mut pending = vec![NodeSet::EMPTY; n];
    let mut transmissions = Vec::new();

    for u in graph.nodes() {
        let state = &prev.states[u.index()];
        assert!(
            state.has_message || state.destinations.is_empty(),
            "node {u} has destinations without the message"
        );
        if !state.has_message {
            continue;
        }
        for w in state.destinations.iter() {
            let slot = graph.slot_index(u, w).expect("destinations are neighbours");
            if delays.is_blocked(slot) {
                pending[u.index()].insert(w);
            } else {
                transmissions.push(EdgeSlot::new(u, w));
                received[w.index()].insert(u);
            }
        }
    }

    let states = graph
        .nodes()
        .map(|u| {
            let sources = received[u.index()];
            let destinations = if sources.is_empty() {
                pending[u.index()]
            } else {
                graph.neighbours(u).difference(sources)
            };
            NodeState {
                has_message: !sources.is_empty() || !destinations.is_empty(),
                sources,
                destinations,
            }
        })
        .collect();

    Ok(Configuration {
        round: prev.round + 1,
        states,
        transmissions,
    })
}

/// Why a trace stopped growing.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TraceVerdict {
    /// First round in which no node holds the message.
    Terminated(usize),
    CapReached,
    /// The configuration (and schedule phase) of `second` equals that of
    /// `first`.
    RepeatDetected {
        first: usize,
        second: usize,
    },
}

/// Configurations from round 0, one per round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub configurations: Vec<Configuration>,
    pub verdict: TraceVerdict,
}

impl Trace {
    pub fn last(&self) -> &Configuration {
        self.configurations.last().expect("trace starts at round 0")
    }

    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }

    /// First round with every message bit cleared.
    pub fn termination_round(&self) -> Option<usize> {
        self.configurations.iter().position(Configuration::is_terminated)
    }

    /// First round in which every destination set is empty. This can be one
    /// round earlier than [`Trace::termination_round`]: a node that received
    /// from all of its neighbours keeps the message for that round with
    /// nothing left to send.
    pub fn first_all_destinations_empty(&self) -> Option<usize> {
        self.configurations
            .iter()
            .position(Configuration::all_destinations_empty)
    }

    /// Keeps stepping for `extra` more rounds. The verdict is left alone.
    pub fn extend(&mut self, graph: &Graph, adversary: &DelayModel, extra: usize) -> Result<(), ProtocolError> {
        for _ in 0..extra {
            let next = advance(graph, adversary, &self.configurations)?;
            self.configurations.push(next);
        }
        Ok(())
    }
}

fn advance(graph: &Graph, adversary: &DelayModel, history: &[Configuration]) -> Result<Configuration, ProtocolError> {
    let prev = history.last().expect("non-empty history");
    let round = prev.round + 1;
    let delays = adversary
        .delays_for_round(graph, round, history)
        .map_err(|source| ProtocolError::Adversary { round, source })?;
    Ok(step(graph, prev, &delays)?)
}

/// Steps from the initial configuration until nobody holds the message or
/// `max_rounds` rounds have been simulated.
pub fn run(graph: &Graph, adversary: &DelayModel, max_rounds: usize) -> Result<Trace, ProtocolError> {
    let mut configurations = vec![initial_configuration(graph)];
    loop {
        let last = configurations.last().unwrap();
        if last.is_terminated() {
            let t = last.round;
            return Ok(Trace {
                configurations,
                verdict: TraceVerdict::Terminated(t),
            });
        }
        if last.round >= max_rounds {
            return Ok(Trace {
                configurations,
                verdict: TraceVerdict::CapReached,
            });
        }
        let next = advance(graph, adversary, &configurations)?;
        configurations.push(next);
    }
}
