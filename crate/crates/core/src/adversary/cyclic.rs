//! Non-termination strategy for any graph with a cycle.
//!
//! Until some node of the chosen cycle holds the message, nothing is
//! blocked. Call that round the trigger `c*`, and the triggering node `v1`.
//! From round `c* + 1` on, the cycle edge `{v_i, v_{i+1}}` (indices mod n,
//! 1-based) is open in both directions only in rounds `j` with
//! `j - c* ≡ i (mod n)`. Every other cycle edge is blocked. Edges off the
//! cycle (chords included) stay open so the schedule keeps the finite delay
//! property.

use super::{AdversaryError, DelayMap, DelayModel, EpaSchedule};
use crate::graph::{Edge, Graph, NodeId};
use crate::protocol::{initial_configuration, step, Configuration};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicAdversary {
    cycle: Vec<NodeId>,
}

/// The cycle as numbered once the trigger has happened.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleOrientation {
    /// `c*`: first round in which a cycle node holds the message.
    pub trigger: usize,
    /// `v1, v2, ..., vn`, with `v1` the triggering node and `v2` not the
    /// source.
    pub order: Vec<NodeId>,
}

impl CycleOrientation {
    /// The cycle edge open in round `j > trigger`.
    pub fn open_edge(&self, j: usize) -> Edge {
        debug_assert!(j > self.trigger);
        let n = self.order.len();
        let i = (j - self.trigger - 1) % n;
        Edge::new(self.order[i], self.order[(i + 1) % n])
    }

    /// `v_{i mod n}` with 1-based `i` (so `i ≡ 0` is `v_n`).
    pub fn node(&self, i: usize) -> NodeId {
        let n = self.order.len();
        self.order[(i + n - 1) % n]
    }
}

impl CyclicAdversary {
    pub fn new(graph: &Graph, cycle: &[NodeId]) -> Result<Self, AdversaryError> {
        if !graph.is_cycle(cycle) {
            return Err(AdversaryError::InvalidCycle(cycle.iter().map(|v| v.index()).collect()));
        }
        Ok(CyclicAdversary { cycle: cycle.to_vec() })
    }

    /// Uses [`Graph::find_cycle`].
    pub fn for_graph(graph: &Graph) -> Result<Self, AdversaryError> {
        let cycle = graph.find_cycle().ok_or(AdversaryError::NoCycle)?;
        Self::new(graph, &cycle)
    }

    pub fn cycle(&self) -> &[NodeId] {
        &self.cycle
    }

    /// Reads the trigger round and numbering off `history`; `None` while no
    /// cycle node has held the message yet.
    pub fn orientation(&self, graph: &Graph, history: &[Configuration]) -> Option<CycleOrientation> {
        let (trigger, first) = history.iter().enumerate().find_map(|(j, c)| {
            self.cycle
                .iter()
                .copied()
                .filter(|v| c.state(*v).has_message)
                .min()
                .map(|v| (j, v))
        })?;

        let n = self.cycle.len();
        let at = self.cycle.iter().position(|v| *v == first).unwrap();
        let forward: Vec<NodeId> = (0..n).map(|k| self.cycle[(at + k) % n]).collect();
        let order = if forward[1] == graph.source() {
            (0..n).map(|k| self.cycle[(at + n - k) % n]).collect::<Vec<_>>()
        } else {
            forward
        };
        assert_ne!(
            order[1],
            graph.source(),
            "a cycle of length >= 3 has a valid orientation"
        );
        Some(CycleOrientation { trigger, order })
    }

    /// Delay decisions for a round after the trigger.
    pub fn rotating_map(&self, graph: &Graph, orientation: &CycleOrientation, j: usize) -> DelayMap {
        let open = orientation.open_edge(j);
        let n = self.cycle.len();
        let mut map = DelayMap::all_open(graph.slot_count());
        for i in 0..n {
            let (a, b) = (self.cycle[i], self.cycle[(i + 1) % n]);
            if Edge::new(a, b) == open {
                continue;
            }
            map.set(graph.slot_index(a, b).unwrap(), true);
            map.set(graph.slot_index(b, a).unwrap(), true);
        }
        map
    }

    /// `history` holds rounds `0..j`.
    pub fn delays_for_round(&self, graph: &Graph, j: usize, history: &[Configuration]) -> DelayMap {
        let seen = &history[..history.len().min(j)];
        match self.orientation(graph, seen) {
            Some(o) if j > o.trigger => self.rotating_map(graph, &o, j),
            _ => DelayMap::all_open(graph.slot_count()),
        }
    }

    /// Resolves the trigger by simulating the always-allow phase and returns
    /// the equivalent eventually periodic table: `c*` open rounds followed by
    /// the `n`-round rotation.
    pub fn to_epa(&self, graph: &Graph) -> Result<(EpaSchedule, CycleOrientation), AdversaryError> {
        let open = DelayMap::all_open(graph.slot_count());
        let mut history = vec![initial_configuration(graph)];
        let orientation = loop {
            if let Some(o) = self.orientation(graph, &history) {
                break o;
            }
            if history.len() > graph.node_count() {
                return Err(AdversaryError::NoTrigger);
            }
            let next = step(graph, history.last().unwrap(), &open).expect("map sized for graph");
            history.push(next);
        };
        let c = orientation.trigger;
        let n = self.cycle.len();
        let prefix = vec![open; c];
        let cycle = (1..=n).map(|k| self.rotating_map(graph, &orientation, c + k)).collect();
        Ok((EpaSchedule::for_graph(graph, prefix, cycle)?, orientation))
    }
}

/// The two-phase cycle strategy on `cycle`, as a [`DelayModel`].
pub fn make_cyclic_nontermination(graph: &Graph, cycle: &[NodeId]) -> Result<DelayModel, AdversaryError> {
    Ok(DelayModel::Cyclic(CyclicAdversary::new(graph, cycle)?))
}
