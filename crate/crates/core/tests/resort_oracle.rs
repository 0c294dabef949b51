use std::collections::BTreeSet;

use proptest::prelude::*;
use pseudosum_core::fcg::{parse_call_graph, resort, tarjan_scc, GraphFormat};
use pseudosum_core::{CallGraph, FunctionId};

fn build(n: usize, edges: &[(usize, usize)]) -> CallGraph {
    let name = |i: usize| FunctionId::new(format!("f{i:02}"));
    CallGraph::new((0..n).map(name), edges.iter().map(|&(a, b)| (name(a), name(b))), None).unwrap()
}

/// Transitive closure by Floyd-Warshall over the vertex order of `g`.
fn reach(g: &CallGraph) -> Vec<Vec<bool>> {
    let ids = g.vertices();
    let n = ids.len();
    let pos = |id: &FunctionId| ids.iter().position(|x| x == id).unwrap();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in g.edges() {
        r[pos(a)][pos(b)] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
            }
        }
    }
    r
}

fn check(g: &CallGraph) -> Result<(), TestCaseError> {
    let order = resort(g);
    let mut sorted: Vec<FunctionId> = order.iter().cloned().collect();
    sorted.sort();
    prop_assert_eq!(&sorted[..], g.vertices());

    let r = reach(g);
    let scc = tarjan_scc(g);
    let ids = g.vertices();
    for i in 0..ids.len() {
        for j in 0..ids.len() {
            let same = scc.component_of(ids[i].as_str()) == scc.component_of(ids[j].as_str());
            prop_assert_eq!(same, r[i][j] && r[j][i]);
        }
    }
    for (caller, callee) in g.edges() {
        if scc.component_of(caller.as_str()) != scc.component_of(callee.as_str()) {
            prop_assert!(order.position(callee.as_str()) < order.position(caller.as_str()));
        }
    }
    prop_assert_eq!(resort(g), order);
    Ok(())
}

proptest! {
    #[test]
    fn random_graphs_match_oracle(n in 1usize..12, raw in prop::collection::vec((0usize..12, 0usize..12), 0..40)) {
        let edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        check(&build(n, &edges))?;
    }
}

#[test]
fn all_three_vertex_graphs() {
    let pairs: Vec<(usize, usize)> = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &e)| e).collect();
        check(&build(3, &edges)).unwrap();
    }
}

#[test]
fn dot_and_json_agree() {
    let dot = "digraph g {\n  main -> parse -> lex;\n  parse -> parse;\n  main -> log [color=red];\n}\n";
    let json = r#"{"vertices": ["main", "parse", "lex", "log"], "edges": [["main","parse"],["parse","lex"],["parse","parse"],["main","log"]]}"#;
    let a = resort(&parse_call_graph(dot, GraphFormat::Dot).unwrap());
    let b = resort(&parse_call_graph(json, GraphFormat::Json).unwrap());
    assert_eq!(a, b);
    let ids: Vec<&str> = a.iter().map(FunctionId::as_str).collect();
    assert_eq!(ids, ["lex", "log", "parse", "main"]);
}

#[test]
fn components_are_a_partition() {
    let g = build(6, &[(0, 1), (1, 0), (2, 3), (3, 4), (4, 2), (5, 5)]);
    let scc = tarjan_scc(&g);
    let mut seen = BTreeSet::new();
    for comp in scc.components() {
        for id in comp {
            assert!(seen.insert(id.clone()));
        }
    }
    assert_eq!(seen.len(), 6);
    assert_eq!(scc.len(), 3);
}
