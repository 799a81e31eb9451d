//! The causal graph `G(M)` and instrumented traversals.
//!
//! Edges run parent → child, i.e. `(Y, X)` is an edge iff `Y ∈ PA_X`.
//! The reduction and detection passes report how many edges they touched via
//! [`OpCounters`], which the test suite uses to verify the linear-time
//! contracts.

use std::collections::BTreeMap;

use crate::model::{CausalModel, VarId, VarKind};

/// Edge/node visit counters for the linear-time contracts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub edge_visits: u64,
    pub node_visits: u64,
}

impl OpCounters {
    #[inline]
    pub fn edge(&mut self) {
        self.edge_visits += 1;
    }

    #[inline]
    pub fn node(&mut self) {
        self.node_visits += 1;
    }
}

/// A directed graph over a subset of a model's variables.
#[derive(Debug, Clone)]
pub struct CausalGraph {
    nodes: Vec<VarId>,
    kinds: Vec<VarKind>,
    index: BTreeMap<VarId, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl CausalGraph {
    fn from_parts(nodes: Vec<VarId>, kinds: Vec<VarKind>, edges: &[(usize, usize)]) -> Self {
        let n = nodes.len();
        let index = nodes.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in edges {
            parents[c].push(p);
            children[p].push(c);
        }
        CausalGraph {
            nodes,
            kinds,
            index,
            parents,
            children,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> &[VarId] {
        &self.nodes
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.index.contains_key(&v)
    }

    pub fn local(&self, v: VarId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn node_at(&self, i: usize) -> VarId {
        self.nodes[i]
    }

    pub fn kind_at(&self, i: usize) -> VarKind {
        self.kinds[i]
    }

    pub fn parents_of(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children_of(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Directed edges as (parent, child) variable pairs.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for (p, cs) in self.children.iter().enumerate() {
            for &c in cs {
                out.push((self.nodes[p], self.nodes[c]));
            }
        }
        out
    }

    pub fn has_edge(&self, parent: VarId, child: VarId) -> bool {
        match (self.local(parent), self.local(child)) {
            (Some(p), Some(c)) => self.children[p].contains(&c),
            _ => false,
        }
    }

    /// The restriction to the given nodes, keeping edges with both endpoints
    /// retained.
    pub fn restrict(&self, keep: impl Fn(VarId) -> bool) -> CausalGraph {
        let mut nodes = Vec::new();
        let mut kinds = Vec::new();
        let mut remap: Vec<Option<usize>> = vec![None; self.nodes.len()];
        for (i, &v) in self.nodes.iter().enumerate() {
            if keep(v) {
                remap[i] = Some(nodes.len());
                nodes.push(v);
                kinds.push(self.kinds[i]);
            }
        }
        let mut edges = Vec::new();
        for (p, cs) in self.children.iter().enumerate() {
            if let Some(np) = remap[p] {
                for &c in cs {
                    if let Some(nc) = remap[c] {
                        edges.push((np, nc));
                    }
                }
            }
        }
        CausalGraph::from_parts(nodes, kinds, &edges)
    }
}

/// `G(M)`: nodes `U ∪ V`, one edge per parent relation.
pub fn causal_graph(m: &CausalModel) -> CausalGraph {
    let nodes: Vec<VarId> = m.all_ids().collect();
    let kinds: Vec<VarKind> = nodes.iter().map(|&v| m.kind(v)).collect();
    let mut edges = Vec::new();
    for (c, &id) in nodes.iter().enumerate() {
        for &p in m.parents(id) {
            edges.push((p.index(), c));
        }
    }
    CausalGraph::from_parts(nodes, kinds, &edges)
}

/// `G_V(M)`: the restriction of a graph to endogenous nodes.
pub fn restrict_to_endogenous(g: &CausalGraph) -> CausalGraph {
    let endo: std::collections::BTreeSet<VarId> = g
        .nodes
        .iter()
        .zip(&g.kinds)
        .filter(|(_, k)| **k == VarKind::Endogenous)
        .map(|(v, _)| *v)
        .collect();
    g.restrict(|v| endo.contains(&v))
}

/// Marks, over the model's full graph, every variable from which some
/// variable in `seeds` is reachable (reflexive: seeds are marked).
pub fn reaches_any(
    m: &CausalModel,
    seeds: impl IntoIterator<Item = VarId>,
    counters: &mut OpCounters,
) -> Vec<bool> {
    let mut mark = vec![false; m.var_count()];
    let mut queue: Vec<VarId> = Vec::new();
    for s in seeds {
        if !mark[s.index()] {
            mark[s.index()] = true;
            queue.push(s);
        }
    }
    while let Some(v) = queue.pop() {
        counters.node();
        for &p in m.parents(v) {
            counters.edge();
            if !mark[p.index()] {
                mark[p.index()] = true;
                queue.push(p);
            }
        }
    }
    mark
}

/// Marks every variable reachable from `sources` by a path with at least one
/// edge (sources themselves are marked only if another source reaches them).
pub fn strictly_reachable_from(
    m: &CausalModel,
    sources: impl IntoIterator<Item = VarId>,
    counters: &mut OpCounters,
) -> Vec<bool> {
    let mut mark = vec![false; m.var_count()];
    let mut queue: Vec<VarId> = Vec::new();
    for s in sources {
        counters.node();
        for &c in m.children(s) {
            counters.edge();
            if !mark[c.index()] {
                mark[c.index()] = true;
                queue.push(c);
            }
        }
    }
    while let Some(v) = queue.pop() {
        counters.node();
        for &c in m.children(v) {
            counters.edge();
            if !mark[c.index()] {
                mark[c.index()] = true;
                queue.push(c);
            }
        }
    }
    mark
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::arson;
    use crate::model::ModelBuilder;

    #[test]
    fn arson_graph_edges() {
        let m = arson();
        let g = causal_graph(&m);
        let name = |v: VarId| m.name(v).to_string();
        let mut edges: Vec<(String, String)> = g
            .edges()
            .into_iter()
            .map(|(p, c)| (name(p), name(c)))
            .collect();
        edges.sort();
        assert_eq!(
            edges,
            vec![
                ("A1".into(), "B".into()),
                ("A2".into(), "B".into()),
                ("U1".into(), "A1".into()),
                ("U2".into(), "A2".into()),
            ]
        );
    }

    #[test]
    fn endogenous_restriction_drops_context_edges() {
        let m = arson();
        let g = restrict_to_endogenous(&causal_graph(&m));
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        let a1 = m.lookup("A1").unwrap();
        let b = m.lookup("B").unwrap();
        assert!(g.has_edge(a1, b));
    }

    #[test]
    fn empty_endogenous_graph() {
        let m = ModelBuilder::new().exogenous("U", ["0"]).build().unwrap();
        let g = restrict_to_endogenous(&causal_graph(&m));
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn reachability_helpers() {
        let m = arson();
        let b = m.lookup("B").unwrap();
        let a1 = m.lookup("A1").unwrap();
        let u1 = m.lookup("U1").unwrap();
        let mut c = OpCounters::default();
        let anc = reaches_any(&m, [b], &mut c);
        assert!(anc[a1.index()] && anc[u1.index()] && anc[b.index()]);
        let desc = strictly_reachable_from(&m, [a1], &mut c);
        assert!(desc[b.index()]);
        assert!(!desc[a1.index()]);
    }
}
