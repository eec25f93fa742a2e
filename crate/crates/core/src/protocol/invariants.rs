//! Trace-level property checks. Each checker returns every violation it
//! finds; an empty vector means the property holds on the trace.

use std::fmt;

use super::Trace;
use crate::graph::{Graph, NodeId};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    /// A destination that neither got delivered nor was received from stays.
    DestinationPersistence,
    /// An empty destination set stays empty until the node receives.
    EmptyDestinationPersistence,
    /// `v ∈ s(j, u)` iff `(v, {v, u}) ∈ r(j)`.
    ReceptionConsistency,
    /// For `j >= 1`, `M = 1` iff `s ∪ dest` is non-empty.
    MessageCharacterisation,
    /// Once nobody holds the message, nobody ever does again.
    TerminationPersistence,
    /// The first all-empty-destinations round is `t_min` or `t_min - 1`.
    DestinationTerminationCorrespondence,
    /// Source and destination sets are disjoint subsets of the neighbourhood.
    StateShape,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub property: Property,
    pub round: usize,
    pub node: Option<NodeId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(v) => write!(
                f,
                "{:?} at round {} node {}: {}",
                self.property, self.round, v, self.detail
            ),
            None => write!(f, "{:?} at round {}: {}", self.property, self.round, self.detail),
        }
    }
}

fn violation(property: Property, round: usize, node: Option<NodeId>, detail: String) -> Violation {
    Violation {
        property,
        round,
        node,
        detail,
    }
}

pub fn destination_persistence(graph: &Graph, trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    for pair in trace.configurations.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        for u in graph.nodes() {
            for v in cur.state(u).destinations.iter() {
                let delivered = next.transmitted(u, v);
                let heard_back = next.state(u).sources.contains(v);
                if !delivered && !heard_back && !next.state(u).destinations.contains(v) {
                    out.push(violation(
                        Property::DestinationPersistence,
                        next.round,
                        Some(u),
                        format!("{v} dropped from destinations without delivery"),
                    ));
                }
            }
        }
    }
    out
}

pub fn empty_destination_persistence(graph: &Graph, trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    for pair in trace.configurations.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        for u in graph.nodes() {
            let n = next.state(u);
            if cur.state(u).destinations.is_empty() && n.sources.is_empty() && !n.destinations.is_empty() {
                out.push(violation(
                    Property::EmptyDestinationPersistence,
                    next.round,
                    Some(u),
                    format!("destinations became {:?} without a reception", n.destinations),
                ));
            }
        }
    }
    out
}

pub fn reception_consistency(graph: &Graph, trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    for c in &trace.configurations {
        for u in graph.nodes() {
            for v in graph.neighbours(u).iter() {
                if c.state(u).sources.contains(v) != c.transmitted(v, u) {
                    out.push(violation(
                        Property::ReceptionConsistency,
                        c.round,
                        Some(u),
                        format!("source set and transmissions disagree about {v}"),
                    ));
                }
            }
        }
        for slot in &c.transmissions {
            if !graph.has_edge(slot.sender, slot.receiver()) {
                out.push(violation(
                    Property::ReceptionConsistency,
                    c.round,
                    None,
                    format!("transmission {slot} is not a graph slot"),
                ));
            }
        }
    }
    out
}

pub fn message_characterisation(graph: &Graph, trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    for c in trace.configurations.iter().filter(|c| c.round >= 1) {
        for u in graph.nodes() {
            let s = c.state(u);
            let busy = !s.sources.is_empty() || !s.destinations.is_empty();
            if s.has_message != busy {
                out.push(violation(
                    Property::MessageCharacterisation,
                    c.round,
                    Some(u),
                    format!("M = {} but s ∪ dest non-empty is {busy}", u8::from(s.has_message)),
                ));
            }
        }
    }
    out
}

pub fn state_shape(graph: &Graph, trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    for c in &trace.configurations {
        for u in graph.nodes() {
            let s = c.state(u);
            let n = graph.neighbours(u);
            let ok = s.sources.is_subset(n)
                && s.destinations.is_subset(n)
                && s.sources.intersection(s.destinations).is_empty()
                && (s.has_message || (s.sources.is_empty() && s.destinations.is_empty()));
            if !ok {
                out.push(violation(Property::StateShape, c.round, Some(u), format!("{s:?}")));
            }
        }
    }
    out
}

pub fn termination_persistence(trace: &Trace) -> Vec<Violation> {
    let Some(t) = trace.termination_round() else {
        return Vec::new();
    };
    trace.configurations[t..]
        .iter()
        .filter(|c| !c.is_terminated())
        .map(|c| {
            violation(
                Property::TerminationPersistence,
                c.round,
                None,
                format!("message reappeared after termination at round {t}"),
            )
        })
        .collect()
}

/// Only meaningful for terminating traces; others pass vacuously.
pub fn destination_termination_correspondence(trace: &Trace) -> Vec<Violation> {
    let Some(t_min) = trace.termination_round() else {
        return Vec::new();
    };
    let first_empty = trace.first_all_destinations_empty();
    let ok = matches!(first_empty, Some(d) if d == t_min || d + 1 == t_min);
    if ok {
        Vec::new()
    } else {
        vec![violation(
            Property::DestinationTerminationCorrespondence,
            t_min,
            None,
            format!("first all-empty destination round is {first_empty:?}"),
        )]
    }
}

/// Runs every checker.
pub fn check_trace(graph: &Graph, trace: &Trace) -> Vec<Violation> {
    let mut out = state_shape(graph, trace);
    out.extend(destination_persistence(graph, trace));
    out.extend(empty_destination_persistence(graph, trace));
    out.extend(reception_consistency(graph, trace));
    out.extend(message_characterisation(graph, trace));
    out.extend(termination_persistence(trace));
    out.extend(destination_termination_correspondence(trace));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{make_basic_triangle, DelayModel};
    use crate::graph::families::*;
    use crate::protocol::{run, NodeState};

    #[test]
    fn clean_on_reference_runs() {
        let g = triangle();
        for model in [DelayModel::AlwaysAllow, DelayModel::Epa(make_basic_triangle())] {
            let mut trace = run(&g, &model, 30).unwrap();
            trace.extend(&g, &model, 5).unwrap();
            assert_eq!(check_trace(&g, &trace), vec![]);
        }
    }

    #[test]
    fn detects_tampering() {
        let g = triangle();
        let mut trace = run(&g, &DelayModel::Epa(make_basic_triangle()), 9).unwrap();
        // drop B's pending destination in round 4
        trace.configurations[4].states[2] = NodeState::IDLE;
        let found = check_trace(&g, &trace);
        assert!(found.iter().any(|v| v.property == Property::DestinationPersistence));

        let mut trace = run(&g, &DelayModel::AlwaysAllow, 10).unwrap();
        trace.configurations[2].transmissions.clear();
        let found = reception_consistency(&g, &trace);
        assert!(!found.is_empty());
    }
}
