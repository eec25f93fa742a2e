//! Network topology: simple, connected, undirected graphs with a
//! distinguished source node.
//!
//! Node identifiers are dense (`0..n`). Node sets are stored as 64-bit
//! masks, which bounds graphs to [`MAX_NODES`] nodes but keeps protocol
//! states small, hashable and totally ordered.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest graph the toolkit accepts.
pub const MAX_NODES: usize = 64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of nodes backed by a bit mask.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    #[inline]
    pub fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn singleton(v: NodeId) -> Self {
        NodeSet(1 << v.0)
    }

    #[inline]
    pub fn contains(self, v: NodeId) -> bool {
        v.0 < MAX_NODES && self.0 & (1 << v.0) != 0
    }

    #[inline]
    pub fn insert(&mut self, v: NodeId) {
        self.0 |= 1 << v.0;
    }

    #[inline]
    pub fn remove(&mut self, v: NodeId) {
        self.0 &= !(1 << v.0);
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = NodeId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(NodeId(i))
        })
    }

    pub fn to_vec(self) -> Vec<NodeId> {
        self.iter().collect()
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut set = NodeSet::EMPTY;
        for v in iter {
            set.insert(v);
        }
        set
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

/// An undirected edge, stored with `a < b`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    a: NodeId,
    b: NodeId,
}

impl Edge {
    /// Normalises the endpoint order. Panics on a self-loop.
    pub fn new(u: NodeId, v: NodeId) -> Self {
        assert_ne!(u, v, "self-loop {u}");
        if u < v {
            Edge { a: u, b: v }
        } else {
            Edge { a: v, b: u }
        }
    }

    pub fn endpoints(self) -> (NodeId, NodeId) {
        (self.a, self.b)
    }

    pub fn contains(self, v: NodeId) -> bool {
        self.a == v || self.b == v
    }

    /// The endpoint that is not `v`. `v` must be an endpoint.
    pub fn other(self, v: NodeId) -> NodeId {
        debug_assert!(self.contains(v));
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.a, self.b)
    }
}

/// A sender together with one of its incident edges: the unit the
/// adversary blocks or allows each round.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSlot {
    pub sender: NodeId,
    pub edge: Edge,
}

impl EdgeSlot {
    pub fn new(sender: NodeId, receiver: NodeId) -> Self {
        EdgeSlot {
            sender,
            edge: Edge::new(sender, receiver),
        }
    }

    pub fn receiver(self) -> NodeId {
        self.edge.other(self.sender)
    }
}

impl fmt::Display for EdgeSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.sender, self.edge)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    NoNodes,
    #[error("graph has {0} nodes; at most {MAX_NODES} are supported")]
    TooManyNodes(usize),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(usize, usize, usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0},{1}}}")]
    DuplicateEdge(usize, usize),
    #[error("source {0} is not a node of a {1}-node graph")]
    InvalidSource(usize, usize),
    #[error("graph is disconnected: node {0} is unreachable from the source")]
    Disconnected(usize),
}

/// A validated simple connected graph with a source node. Immutable once
/// built.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    source: NodeId,
    edges: Vec<Edge>,
    adjacency: Vec<NodeSet>,
    slots: Vec<EdgeSlot>,
    // sender * n + receiver -> index into `slots`
    slot_lookup: Vec<Option<u32>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("nodes", &self.node_count)
            .field("source", &self.source.0)
            .field("edges", &self.edges)
            .finish()
    }
}

impl Graph {
    pub fn new(node_count: usize, edges: &[(usize, usize)], source: usize) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::NoNodes);
        }
        if node_count > MAX_NODES {
            return Err(GraphError::TooManyNodes(node_count));
        }
        if source >= node_count {
            return Err(GraphError::InvalidSource(source, node_count));
        }

        let mut adjacency = vec![NodeSet::EMPTY; node_count];
        let mut edge_list = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(GraphError::NodeOutOfRange(u, v, node_count));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if adjacency[u].contains(NodeId(v)) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            adjacency[u].insert(NodeId(v));
            adjacency[v].insert(NodeId(u));
            edge_list.push(Edge::new(NodeId(u), NodeId(v)));
        }
        edge_list.sort();

        let mut slots = Vec::with_capacity(2 * edge_list.len());
        let mut slot_lookup = vec![None; node_count * node_count];
        for (u, nbrs) in adjacency.iter().enumerate() {
            for w in nbrs.iter() {
                slot_lookup[u * node_count + w.0] = Some(slots.len() as u32);
                slots.push(EdgeSlot::new(NodeId(u), w));
            }
        }

        let graph = Graph {
            node_count,
            source: NodeId(source),
            edges: edge_list,
            adjacency,
            slots,
            slot_lookup,
        };
        let dist = graph.distances_from(graph.source);
        if let Some(v) = dist.iter().position(Option::is_none) {
            return Err(GraphError::Disconnected(v));
        }
        Ok(graph)
    }

    /// Same topology, different source.
    pub fn with_source(&self, source: usize) -> Result<Self, GraphError> {
        if source >= self.node_count {
            return Err(GraphError::InvalidSource(source, self.node_count));
        }
        Ok(Graph {
            source: NodeId(source),
            ..self.clone()
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    /// Edges sorted by `(a, b)` with `a < b`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbours(&self, v: NodeId) -> NodeSet {
        self.adjacency[v.0]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u.0 < self.node_count && self.adjacency[u.0].contains(v)
    }

    /// All `2|E|` slots, sorted by sender then by the other endpoint.
    pub fn edge_slots(&self) -> &[EdgeSlot] {
        &self.slots
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Position of `(sender, {sender, receiver})` in [`Graph::edge_slots`].
    #[inline]
    pub fn slot_index(&self, sender: NodeId, receiver: NodeId) -> Option<usize> {
        if sender.0 >= self.node_count || receiver.0 >= self.node_count {
            return None;
        }
        self.slot_lookup[sender.0 * self.node_count + receiver.0].map(|i| i as usize)
    }

    pub fn index_of_slot(&self, slot: EdgeSlot) -> Option<usize> {
        if !slot.edge.contains(slot.sender) {
            return None;
        }
        self.slot_index(slot.sender, slot.receiver())
    }

    /// BFS hop distances from `v`; `None` marks unreachable nodes.
    pub fn distances_from(&self, v: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count];
        let mut queue = VecDeque::new();
        dist[v.0] = Some(0);
        queue.push_back(v);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.0].unwrap();
            for w in self.adjacency[u.0].iter() {
                if dist[w.0].is_none() {
                    dist[w.0] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Largest hop distance from `v` to any node.
    pub fn eccentricity(&self, v: NodeId) -> usize {
        self.distances_from(v)
            .into_iter()
            .map(|d| d.expect("graph is connected"))
            .max()
            .unwrap_or(0)
    }

    pub fn is_acyclic(&self) -> bool {
        self.edges.len() + 1 == self.node_count
    }

    /// A simple cycle `v1..vn` (n >= 3), or `None` for a tree.
    ///
    /// Runs a DFS from node 0 taking neighbours in ascending order and
    /// returns the tree path closed by the first back edge, so the result is
    /// deterministic.
    pub fn find_cycle(&self) -> Option<Vec<NodeId>> {
        let n = self.node_count;
        let mut parent: Vec<Option<NodeId>> = vec![None; n];
        let mut visited = vec![false; n];
        let mut on_path = vec![false; n];
        // (node, neighbours not yet explored)
        let mut stack: Vec<(NodeId, NodeSet)> = Vec::new();

        visited[0] = true;
        on_path[0] = true;
        stack.push((NodeId(0), self.adjacency[0]));

        while let Some((u, remaining)) = stack.last_mut() {
            let u = *u;
            let Some(w) = remaining.iter().next() else {
                on_path[u.0] = false;
                stack.pop();
                continue;
            };
            remaining.remove(w);
            if Some(w) == parent[u.0] {
                continue;
            }
            if visited[w.0] {
                debug_assert!(on_path[w.0], "undirected DFS only meets ancestors");
                let start = stack.iter().position(|(x, _)| *x == w).expect("ancestor on stack");
                return Some(stack[start..].iter().map(|(x, _)| *x).collect());
            }
            visited[w.0] = true;
            on_path[w.0] = true;
            parent[w.0] = Some(u);
            stack.push((w, self.adjacency[w.0]));
        }
        None
    }

    /// True when `cycle` is a simple cycle of length >= 3 in this graph.
    pub fn is_cycle(&self, cycle: &[NodeId]) -> bool {
        let n = cycle.len();
        if n < 3 || cycle.iter().any(|v| v.0 >= self.node_count) {
            return false;
        }
        let distinct: NodeSet = cycle.iter().copied().collect();
        distinct.len() == n && (0..n).all(|i| self.has_edge(cycle[i], cycle[(i + 1) % n]))
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            nodes: self.node_count,
            edges: self.edges.iter().map(|e| [e.a.0, e.b.0]).collect(),
            source: self.source.0,
            names: None,
        }
    }
}

/// On-disk graph format: `{"nodes": n, "edges": [[a,b],...], "source": s}`.
/// Node names are only carried for presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
    pub source: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph, GraphError> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|&[a, b]| (a, b)).collect();
        Graph::new(self.nodes, &edges, self.source)
    }
}

/// Common graph families, all with source 0.
pub mod families {
    use super::Graph;

    pub fn single_node() -> Graph {
        Graph::new(1, &[], 0).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::new(n, &edges, 0).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3);
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges, 0).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Graph::new(n, &edges, 0).unwrap()
    }

    /// Centre 0 with `leaves` leaves.
    pub fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::new(leaves + 1, &edges, 0).unwrap()
    }

    /// The triangle with Source = 0, A = 1, B = 2.
    pub fn triangle() -> Graph {
        complete(3)
    }
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;

    fn ids(v: &[usize]) -> NodeSet {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn builds_triangle() {
        let g = Graph::new(3, &[(0, 1), (0, 2), (1, 2)], 0).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.source(), NodeId(0));
        assert_eq!(g, triangle());
    }

    #[test]
    fn single_node_graph() {
        let g = Graph::new(1, &[], 0).unwrap();
        assert_eq!(g.node_count(), 1);
        assert!(g.neighbours(NodeId(0)).is_empty());
        assert!(g.edge_slots().is_empty());
    }

    #[test]
    fn rejections_are_distinct() {
        assert_eq!(Graph::new(3, &[(0, 1)], 0), Err(GraphError::Disconnected(2)));
        assert_eq!(Graph::new(2, &[(1, 1)], 0), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            Graph::new(2, &[(0, 1), (1, 0)], 0),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(Graph::new(2, &[(0, 1)], 2), Err(GraphError::InvalidSource(2, 2)));
        assert_eq!(Graph::new(2, &[(0, 5)], 0), Err(GraphError::NodeOutOfRange(0, 5, 2)));
        assert_eq!(Graph::new(0, &[], 0), Err(GraphError::NoNodes));
        assert_eq!(Graph::new(65, &[], 0), Err(GraphError::TooManyNodes(65)));
    }

    #[test]
    fn neighbour_sets() {
        assert_eq!(triangle().neighbours(NodeId(0)), ids(&[1, 2]));
        assert_eq!(path(3).neighbours(NodeId(1)), ids(&[0, 2]));
        assert_eq!(single_node().neighbours(NodeId(0)), NodeSet::EMPTY);
    }

    #[test]
    fn cycles() {
        assert_eq!(triangle().find_cycle(), Some(vec![NodeId(0), NodeId(1), NodeId(2)]));
        assert_eq!(path(3).find_cycle(), None);
        assert_eq!(star(4).find_cycle(), None);

        // C4 on 0..3 plus pendant 4 hanging off 2
        let g = Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 0), (2, 4)], 0).unwrap();
        let c = g.find_cycle().unwrap();
        assert_eq!(c.len(), 4);
        assert!(g.is_cycle(&c));
        assert!(!c.contains(&NodeId(4)));
    }

    #[test]
    fn eccentricities() {
        assert_eq!(triangle().eccentricity(NodeId(0)), 1);
        assert_eq!(path(3).eccentricity(NodeId(0)), 2);
        assert_eq!(path(3).eccentricity(NodeId(1)), 1);
        assert_eq!(star(5).eccentricity(NodeId(0)), 1);
        assert_eq!(star(5).eccentricity(NodeId(3)), 2);
        assert_eq!(single_node().eccentricity(NodeId(0)), 0);
    }

    #[test]
    fn slot_ordering() {
        assert_eq!(triangle().edge_slots().len(), 6);
        let g = path(2);
        assert_eq!(
            g.edge_slots(),
            &[EdgeSlot::new(NodeId(0), NodeId(1)), EdgeSlot::new(NodeId(1), NodeId(0))]
        );
        let p = path(3);
        let slots = p.edge_slots();
        assert_eq!(slots.len(), 4);
        let pairs: Vec<_> = slots.iter().map(|s| (s.sender.0, s.receiver().0)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
        for (i, s) in slots.iter().enumerate() {
            assert_eq!(p.index_of_slot(*s), Some(i));
        }
    }

    #[test]
    fn spec_round_trip() {
        let g = complete(4).with_source(2).unwrap();
        let json = serde_json::to_string(&g.to_spec()).unwrap();
        assert_eq!(
            json,
            r#"{"nodes":4,"edges":[[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]],"source":2}"#
        );
        let back: GraphSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap(), g);
    }
}
