//! Corpus loading and small-graph helpers shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use itertools::Itertools;
use rand_xoshiro::rand_core::Rng;
use serde::Deserialize;

use rdaf_core::{Graph, GraphSpec, NodeId, NodeState};

#[derive(Deserialize)]
struct Entry {
    name: String,
    graph: GraphSpec,
}

pub fn data_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(file)
}

pub fn load_corpus(file: &str) -> Vec<(String, Graph)> {
    let text = std::fs::read_to_string(data_path(file)).unwrap();
    let entries: Vec<Entry> = serde_json::from_str(&text).unwrap();
    entries
        .into_iter()
        .map(|e| (e.name, e.graph.build().unwrap()))
        .collect()
}

fn edge_bit(n: usize, a: usize, b: usize) -> u32 {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    // index of (a, b) among pairs of 0..n
    (a * (2 * n - a - 1) / 2 + (b - a - 1)) as u32
}

fn edge_mask(n: usize, edges: &[(usize, usize)]) -> u64 {
    edges.iter().fold(0, |m, &(a, b)| m | 1 << edge_bit(n, a, b))
}

/// Smallest edge mask over all relabellings, optionally keeping track of
/// one rooted node.
pub fn canonical_form(n: usize, edges: &[(usize, usize)], root: Option<usize>) -> (u64, usize) {
    (0..n)
        .permutations(n)
        .map(|p| {
            let mapped: Vec<_> = edges.iter().map(|&(a, b)| (p[a], p[b])).collect();
            (edge_mask(n, &mapped), root.map_or(0, |r| p[r]))
        })
        .min()
        .unwrap_or((0, 0))
}

pub fn graph_edges(g: &Graph) -> Vec<(usize, usize)> {
    g.edges()
        .iter()
        .map(|e| {
            let (a, b) = e.endpoints();
            (a.index(), b.index())
        })
        .collect()
}

/// One source per automorphism orbit.
pub fn distinct_sources(g: &Graph) -> Vec<usize> {
    let edges = graph_edges(g);
    let n = g.node_count();
    let mut seen = BTreeSet::new();
    (0..n)
        .filter(|&v| seen.insert(canonical_form(n, &edges, Some(v))))
        .collect()
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut reach = vec![false; n];
    reach[0] = true;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !reach[y] {
                    reach[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    reach.into_iter().all(|r| r)
}

/// Isomorphism classes of connected graphs on `n` nodes with at most
/// `max_edges` edges, by exhaustive enumeration of edge subsets.
pub fn connected_classes(n: usize, max_edges: usize) -> BTreeSet<u64> {
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    let mut classes = BTreeSet::new();
    for mask in 0u64..(1 << pairs.len()) {
        if mask.count_ones() as usize > max_edges {
            continue;
        }
        let edges: Vec<_> = (0..pairs.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| pairs[i])
            .collect();
        if connected(n, &edges) {
            classes.insert(canonical_form(n, &edges, None).0);
        }
    }
    classes
}

/// Random labelled tree: node `i` hangs off a uniformly chosen earlier node.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| ((rng.next_u64() % i as u64) as usize, i)).collect()
}

pub fn state_record(s: &NodeState) -> (u8, Vec<usize>, Vec<usize>) {
    (
        u8::from(s.has_message),
        s.sources.iter().map(NodeId::index).collect(),
        s.destinations.iter().map(NodeId::index).collect(),
    )
}

/// Rows of the golden basic-strategy table as canonical JSON, one string
/// per round: `[[M,[s..],[dest..]], ...]` in node order S, A, B.
pub fn golden_table() -> Vec<String> {
    let text = std::fs::read_to_string(data_path("basic_strategy_table.txt")).unwrap();
    let index = |name: &str| match name {
        "S" => 0usize,
        "A" => 1,
        "B" => 2,
        other => panic!("unknown node {other}"),
    };
    let set = |s: &str| -> Vec<usize> {
        let inner = s.trim_start_matches('{').trim_end_matches('}');
        let mut v: Vec<usize> = inner.split(',').filter(|x| !x.is_empty()).map(index).collect();
        v.sort();
        v
    };
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let mut parts = line.split_whitespace();
            parts.next();
            let states: Vec<(u8, Vec<usize>, Vec<usize>)> = parts
                .map(|cell| {
                    let (_, triple) = cell.split_once(':').unwrap();
                    let triple = triple.trim_start_matches('(').trim_end_matches(')');
                    let (m, rest) = triple.split_once(',').unwrap();
                    let split = rest.find("},").unwrap() + 1;
                    (m.parse().unwrap(), set(&rest[..split]), set(&rest[split + 1..]))
                })
                .collect();
            serde_json::to_string(&states).unwrap()
        })
        .collect()
}
