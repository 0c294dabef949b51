use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use super::{CallGraph, FunctionId, ProcessingList};

/// Index of a strongly connected component.
///
/// Components are numbered by their smallest member id, so ascending
/// `SccId` matches ascending smallest [`FunctionId`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SccId(pub usize);

impl fmt::Display for SccId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    component_of: Vec<SccId>,
    members: Vec<Vec<usize>>,
    member_ids: Vec<Vec<FunctionId>>,
    lookup: BTreeMap<FunctionId, SccId>,
    condensed: BTreeSet<(SccId, SccId)>,
}

impl SccDecomposition {
    pub fn component_of(&self, id: &str) -> Option<SccId> {
        self.lookup.get(id).copied()
    }

    /// Members of each component, ascending by id; indexed by `SccId.0`.
    pub fn components(&self) -> &[Vec<FunctionId>] {
        &self.member_ids
    }

    pub fn members(&self, c: SccId) -> &[FunctionId] {
        &self.member_ids[c.0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Edges between distinct components, as (caller component, callee component).
    pub fn condensed_edges(&self) -> &BTreeSet<(SccId, SccId)> {
        &self.condensed
    }

    fn member_indices(&self, c: SccId) -> &[usize] {
        &self.members[c.0]
    }
}

/// Tarjan's strongly connected components, iterative to survive deep call chains.
pub fn tarjan_scc(g: &CallGraph) -> SccDecomposition {
    let n = g.len();
    let mut disc: Vec<Option<usize>> = vec![None; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut frames: Vec<(usize, usize)> = Vec::new();
    let mut counter = 0usize;
    let mut raw: Vec<Vec<usize>> = Vec::new();

    for root in 0..n {
        if disc[root].is_some() {
            continue;
        }
        disc[root] = Some(counter);
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, 0));

        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            if let Some(&w) = g.successors(v).get(frame.1) {
                frame.1 += 1;
                match disc[w] {
                    None => {
                        disc[w] = Some(counter);
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        frames.push((w, 0));
                    }
                    Some(dw) if on_stack[w] => low[v] = low[v].min(dw),
                    Some(_) => {}
                }
                continue;
            }
            frames.pop();
            if Some(low[v]) == disc[v] {
                let mut comp = Vec::new();
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                raw.push(comp);
            }
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
        }
    }

    raw.sort_unstable_by_key(|c| c[0]);
    let mut component_of = vec![SccId(0); n];
    for (c, members) in raw.iter().enumerate() {
        for &v in members {
            component_of[v] = SccId(c);
        }
    }
    let mut condensed = BTreeSet::new();
    for u in 0..n {
        for &v in g.successors(u) {
            let (cu, cv) = (component_of[u], component_of[v]);
            if cu != cv {
                condensed.insert((cu, cv));
            }
        }
    }
    let member_ids: Vec<Vec<FunctionId>> =
        raw.iter().map(|c| c.iter().map(|&v| g.id(v).clone()).collect()).collect();
    let lookup = (0..n).map(|v| (g.id(v).clone(), component_of[v])).collect();

    SccDecomposition { component_of, members: raw, member_ids, lookup, condensed }
}

/// Orders components so that every callee component precedes its callers.
/// Ties go to the smallest `SccId`.
pub fn reverse_topsort(scc: &SccDecomposition) -> Vec<SccId> {
    let k = scc.len();
    let mut pending_callees = vec![0usize; k];
    let mut callers: Vec<Vec<SccId>> = vec![Vec::new(); k];
    for &(from, to) in scc.condensed_edges() {
        pending_callees[from.0] += 1;
        callers[to.0].push(from);
    }

    let mut ready: BinaryHeap<Reverse<SccId>> =
        (0..k).filter(|&c| pending_callees[c] == 0).map(|c| Reverse(SccId(c))).collect();
    let mut out = Vec::with_capacity(k);
    while let Some(Reverse(c)) = ready.pop() {
        out.push(c);
        for &caller in &callers[c.0] {
            pending_callees[caller.0] -= 1;
            if pending_callees[caller.0] == 0 {
                ready.push(Reverse(caller));
            }
        }
    }
    debug_assert_eq!(out.len(), k, "condensation must be acyclic");
    out
}

/// Hop distance from the nearest entry vertex.
///
/// Orders before every finite distance is `Unreachable`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Unreachable => f.write_str("unreachable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    dist: BTreeMap<FunctionId, Distance>,
}

impl DistanceMap {
    /// `None` only for ids that are not vertices of the graph.
    pub fn get(&self, id: &str) -> Option<Distance> {
        self.dist.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FunctionId, Distance)> + '_ {
        self.dist.iter().map(|(k, &d)| (k, d))
    }
}

fn distances(g: &CallGraph) -> Vec<Distance> {
    let mut dist = vec![Distance::Unreachable; g.len()];
    let mut heap = BinaryHeap::new();
    for &e in g.entry_indices() {
        dist[e] = Distance::Finite(0);
        heap.push(Reverse((0usize, e)));
    }
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u] < Distance::Finite(d) {
            continue;
        }
        for &v in g.successors(u) {
            let cand = Distance::Finite(d + 1);
            if cand < dist[v] {
                dist[v] = cand;
                heap.push(Reverse((d + 1, v)));
            }
        }
    }
    dist
}

/// Multi-source shortest paths from the graph's entries with unit edge weights.
pub fn dijkstra(g: &CallGraph) -> DistanceMap {
    let dist = distances(g);
    DistanceMap { dist: g.vertices().iter().cloned().zip(dist).collect() }
}

/// Callee-first processing order.
///
/// Components are visited in [`reverse_topsort`] order. Inside a component
/// the walk starts at the member nearest an entry (ties to the smallest id)
/// and emits a depth-first pre-order restricted to the component, visiting
/// neighbours in ascending id order. Members the walk cannot reach are
/// re-seeded by the same rule.
pub fn resort(g: &CallGraph) -> ProcessingList {
    let scc = tarjan_scc(g);
    let dist = distances(g);
    let mut visited = vec![false; g.len()];
    let mut out = Vec::with_capacity(g.len());
    let mut stack = Vec::new();

    for c in reverse_topsort(&scc) {
        let members = scc.member_indices(c);
        while let Some(&start) = members.iter().filter(|&&v| !visited[v]).min_by_key(|&&v| (dist[v], v)) {
            stack.push(start);
            while let Some(v) = stack.pop() {
                if visited[v] {
                    continue;
                }
                visited[v] = true;
                out.push(g.id(v).clone());
                for &w in g.successors(v).iter().rev() {
                    if w != v && !visited[w] && scc.component_of[w] == c {
                        stack.push(w);
                    }
                }
            }
        }
    }
    ProcessingList::new(out)
}
