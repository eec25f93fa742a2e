mod common;

use std::collections::BTreeSet;

use common::{canonical_form, connected_classes, golden_table, graph_edges, load_corpus};

fn classes_of(file: &str) -> Vec<(usize, u64)> {
    load_corpus(file)
        .iter()
        .map(|(_, g)| (g.node_count(), canonical_form(g.node_count(), &graph_edges(g), None).0))
        .collect()
}

#[test]
fn small_connected_corpus_is_complete() {
    let listed = classes_of("connected_le4.json");
    let distinct: BTreeSet<_> = listed.iter().copied().collect();
    assert_eq!(distinct.len(), listed.len(), "duplicate isomorphism class");
    for n in 1..=4 {
        let expected = connected_classes(n, usize::MAX);
        let have: BTreeSet<u64> = listed.iter().filter(|(m, _)| *m == n).map(|&(_, c)| c).collect();
        assert_eq!(have, expected, "n = {n}");
    }
    assert_eq!(listed.len(), 10);
}

#[test]
fn tree_corpus_is_complete() {
    let listed = classes_of("trees_le6.json");
    let distinct: BTreeSet<_> = listed.iter().copied().collect();
    assert_eq!(distinct.len(), listed.len(), "duplicate isomorphism class");
    for n in 1..=6 {
        let expected = connected_classes(n, n - 1);
        let have: BTreeSet<u64> = listed.iter().filter(|(m, _)| *m == n).map(|&(_, c)| c).collect();
        assert_eq!(have, expected, "n = {n}");
    }
    assert_eq!(listed.len(), 14);
}

#[test]
fn golden_table_parses() {
    let rows = golden_table();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0], "[[1,[],[1,2]],[0,[],[]],[0,[],[]]]");
    assert_eq!(rows[9], "[[1,[2],[1]],[0,[],[]],[1,[0],[1]]]");
}
