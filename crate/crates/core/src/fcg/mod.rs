//! Function call graphs and the callee-first processing order.
//!
//! A [`CallGraph`] is a deduplicated caller → callee digraph over function
//! ids. [`resort`] condenses it into strongly connected components, orders the
//! components callees-first, and expands each component by a depth-first walk
//! that starts at the member closest to the entry points.

mod order;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use order::{dijkstra, resort, reverse_topsort, tarjan_scc, Distance, DistanceMap, SccDecomposition, SccId};
pub use parse::{parse_call_graph, GraphFormat};

/// Identifier of a function inside one binary (usually its symbol or
/// decompiler name).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionId(String);

impl FunctionId {
    pub fn new(id: impl Into<String>) -> Self {
        FunctionId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FunctionId {
    fn from(s: &str) -> Self {
        FunctionId(s.to_owned())
    }
}

impl From<String> for FunctionId {
    fn from(s: String) -> Self {
        FunctionId(s)
    }
}

impl AsRef<str> for FunctionId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for FunctionId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("edge endpoint `{id}` is not a declared vertex")]
    DanglingEndpoint { id: FunctionId },
    #[error("entry `{id}` is not a declared vertex")]
    UnknownEntry { id: FunctionId },
}

/// Directed caller → callee graph.
///
/// Vertices are kept sorted by id, so vertex indices follow id order and
/// index-based tie-breaks coincide with ascending [`FunctionId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph {
    ids: Vec<FunctionId>,
    index: BTreeMap<FunctionId, usize>,
    // sorted, deduplicated; self-loops kept
    succ: Vec<Vec<usize>>,
    entries: Vec<usize>,
}

impl CallGraph {
    /// Builds a graph, collapsing parallel edges.
    ///
    /// When `entries` is `None` or empty the entry set defaults to every
    /// vertex without incoming edges from other vertices, or failing that the
    /// smallest vertex id.
    pub fn new(
        vertices: impl IntoIterator<Item = FunctionId>,
        edges: impl IntoIterator<Item = (FunctionId, FunctionId)>,
        entries: Option<Vec<FunctionId>>,
    ) -> Result<Self, GraphError> {
        let mut ids: Vec<FunctionId> = vertices.into_iter().collect();
        ids.sort();
        ids.dedup();
        let index: BTreeMap<FunctionId, usize> = ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();

        let mut succ = vec![Vec::new(); ids.len()];
        for (from, to) in edges {
            let f = *index.get(&from).ok_or(GraphError::DanglingEndpoint { id: from })?;
            let t = *index.get(&to).ok_or(GraphError::DanglingEndpoint { id: to })?;
            succ[f].push(t);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }

        let mut g = CallGraph { ids, index, succ, entries: Vec::new() };
        g.entries = match entries {
            Some(list) if !list.is_empty() => {
                let mut out = Vec::with_capacity(list.len());
                for id in list {
                    let i = g.index_of(id.as_str()).ok_or(GraphError::UnknownEntry { id })?;
                    if !out.contains(&i) {
                        out.push(i);
                    }
                }
                out
            }
            _ => g.default_entries(),
        };
        Ok(g)
    }

    fn default_entries(&self) -> Vec<usize> {
        let mut has_caller = vec![false; self.ids.len()];
        for (u, targets) in self.succ.iter().enumerate() {
            for &v in targets {
                if v != u {
                    has_caller[v] = true;
                }
            }
        }
        let roots: Vec<usize> = (0..self.ids.len()).filter(|&v| !has_caller[v]).collect();
        if roots.is_empty() && !self.ids.is_empty() {
            vec![0]
        } else {
            roots
        }
    }

    /// Vertex ids in ascending order.
    pub fn vertices(&self) -> &[FunctionId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Edges as (caller, callee), ordered by caller then callee.
    pub fn edges(&self) -> impl Iterator<Item = (&FunctionId, &FunctionId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(move |(u, vs)| vs.iter().map(move |&v| (&self.ids[u], &self.ids[v])))
    }

    pub fn entries(&self) -> impl Iterator<Item = &FunctionId> + '_ {
        self.entries.iter().map(|&i| &self.ids[i])
    }

    /// Direct callees of `id`, ascending. Empty when `id` is unknown.
    pub fn callees(&self, id: &str) -> impl Iterator<Item = &FunctionId> + '_ {
        let targets = self.index.get(id).map_or(&[][..], |&i| &self.succ[i][..]);
        targets.iter().map(|&v| &self.ids[v])
    }

    pub(crate) fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub(crate) fn entry_indices(&self) -> &[usize] {
        &self.entries
    }

    pub(crate) fn id(&self, v: usize) -> &FunctionId {
        &self.ids[v]
    }
}

/// Functions in processing order: callees before callers across components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProcessingList {
    order: Vec<FunctionId>,
}

impl ProcessingList {
    pub(crate) fn new(order: Vec<FunctionId>) -> Self {
        ProcessingList { order }
    }

    pub fn as_slice(&self) -> &[FunctionId] {
        &self.order
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FunctionId> {
        self.order.iter()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.order.iter().position(|f| f.as_str() == id)
    }

    pub fn into_vec(self) -> Vec<FunctionId> {
        self.order
    }
}

impl<'a> IntoIterator for &'a ProcessingList {
    type Item = &'a FunctionId;
    type IntoIter = std::slice::Iter<'a, FunctionId>;

    fn into_iter(self) -> Self::IntoIter {
        self.order.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<FunctionId> {
        names.iter().map(|&n| n.into()).collect()
    }

    fn edge(a: &str, b: &str) -> (FunctionId, FunctionId) {
        (a.into(), b.into())
    }

    #[test]
    fn parallel_edges_collapse() {
        let g = CallGraph::new(ids(&["a", "b"]), vec![edge("a", "b"), edge("a", "b")], None).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn dangling_edge_rejected() {
        let err = CallGraph::new(ids(&["main"]), vec![edge("main", "ghost")], None).unwrap_err();
        assert_eq!(err, GraphError::DanglingEndpoint { id: "ghost".into() });
    }

    #[test]
    fn default_entries() {
        let g = CallGraph::new(ids(&["main", "f", "lone"]), vec![edge("main", "f")], None).unwrap();
        assert_eq!(g.entries().map(FunctionId::as_str).collect::<Vec<_>>(), ["lone", "main"]);

        // self-loop does not count as a caller
        let g = CallGraph::new(ids(&["r"]), vec![edge("r", "r")], None).unwrap();
        assert_eq!(g.entries().map(FunctionId::as_str).collect::<Vec<_>>(), ["r"]);

        // pure cycle falls back to the smallest id
        let g = CallGraph::new(ids(&["y", "x"]), vec![edge("x", "y"), edge("y", "x")], None).unwrap();
        assert_eq!(g.entries().map(FunctionId::as_str).collect::<Vec<_>>(), ["x"]);
    }

    #[test]
    fn explicit_entries_validated() {
        let err = CallGraph::new(ids(&["a"]), vec![], Some(ids(&["b"]))).unwrap_err();
        assert_eq!(err, GraphError::UnknownEntry { id: "b".into() });
        let g = CallGraph::new(ids(&["a", "b"]), vec![], Some(ids(&["b", "b"]))).unwrap();
        assert_eq!(g.entries().count(), 1);
    }

    #[test]
    fn callees_sorted() {
        let g = CallGraph::new(ids(&["m", "z", "a"]), vec![edge("m", "z"), edge("m", "a")], None).unwrap();
        assert_eq!(g.callees("m").map(FunctionId::as_str).collect::<Vec<_>>(), ["a", "z"]);
        assert_eq!(g.callees("nope").count(), 0);
    }
}
