//! Weak-cause decision on causal trees.
//!
//! Applies when the cause `X` and the event variable `Y` are singletons and
//! the relevant endogenous graph is a directed tree with root `Y` (every
//! other node has exactly one outgoing edge). Along the unique path
//! `X = P^k → … → P^0 = Y`, level sets `R^i` of candidate value subsets of
//! `D(P^i)` are propagated from the root:
//!
//! - `R^0 = { D(Y) \ {y} }`;
//! - `R^i` collects, for every sibling assignment `w ∈ D(W^i)` and every
//!   `p' ∈ R^{i-1}` with `P^{i-1}_{p̂^i w}(u) ∉ p'`, the set
//!   `{ p ∈ D(P^i) : P^{i-1}_{pw}(u) ∈ p' }`,
//!
//! where `W^i` are the other parents of `P^{i-1}` and `p̂^i = P^i(u)`.
//! `X = x` is then a weak cause of `Y = y` under `u` iff `X(u) = x`,
//! `Y(u) = y`, and some nonempty `p ∈ R^k` excludes `x`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::graph::{restrict_to_endogenous, OpCounters};
use crate::iterate::{for_each_value_tuple, sort_by_name};
use crate::model::{Assignment, CausalModel, Evaluator, Value, VarId};
use crate::reduction::relevant_graph_counted;

/// The unique cause-to-root path of a detected causal tree.
#[derive(Debug, Clone)]
pub struct TreePath {
    /// `nodes[i]` is `P^i`: `nodes[0]` is the root `Y`, `nodes[k]` is `X`.
    pub nodes: Vec<VarId>,
    /// `siblings[i]` are the parents of `P^{i-1}` other than `P^i`, sorted
    /// by name; `siblings[0]` is unused and empty.
    pub siblings: Vec<Vec<VarId>>,
}

impl TreePath {
    pub fn depth(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Outcome of tree detection.
#[derive(Debug, Clone)]
pub struct TreeDetection {
    pub path: TreePath,
    /// Maximum parent count over the relevant endogenous graph; compare
    /// against a bound to decide whether the tree counts as bounded.
    pub max_in_degree: usize,
}

/// Per-level value-subset relation.
#[derive(Debug, Clone)]
pub struct TreeRelation {
    /// `levels[i]` is `R^i`, a set of subsets of `D(P^i)`.
    pub levels: Vec<BTreeSet<BTreeSet<Value>>>,
}

/// Instrumentation for the bounded-profile assertions.
#[derive(Debug, Clone, Default)]
pub struct RelationStats {
    pub evals_per_level: Vec<u64>,
    pub sizes_per_level: Vec<usize>,
}

/// Checks whether the relevant endogenous graph for `(X, Y)` is a directed
/// tree with root `Y` and extracts the decision path. Linear in the graph
/// size.
pub fn detect_tree(m: &CausalModel, x: VarId, y: VarId) -> Option<TreeDetection> {
    detect_tree_counted(m, x, y, &mut OpCounters::default())
}

pub fn detect_tree_counted(
    m: &CausalModel,
    x: VarId,
    y: VarId,
    counters: &mut OpCounters,
) -> Option<TreeDetection> {
    if x == y {
        return None;
    }
    let phi = Event::prim(y, Value(0));
    let g = restrict_to_endogenous(&relevant_graph_counted(m, &[x], &phi, counters));
    let yl = g.local(y)?;
    let xl = g.local(x)?;
    // directed tree with root y: the root has no outgoing edge, everything
    // else exactly one
    let mut max_in = 0usize;
    for i in 0..g.node_count() {
        counters.node();
        let out = g.children_of(i).len();
        counters.edge_visits += out as u64;
        max_in = max_in.max(g.parents_of(i).len());
        if i == yl {
            if out != 0 {
                return None;
            }
        } else if out != 1 {
            return None;
        }
    }
    // follow the unique out-edges from x to y
    let mut rev_path = vec![g.node_at(xl)];
    let mut cur = xl;
    while cur != yl {
        counters.node();
        let next = g.children_of(cur)[0];
        rev_path.push(g.node_at(next));
        cur = next;
        if rev_path.len() > g.node_count() {
            return None;
        }
    }
    // nodes[i] = P^i with P^0 = y
    let nodes: Vec<VarId> = rev_path.into_iter().rev().collect();
    let k = nodes.len() - 1;
    let mut siblings: Vec<Vec<VarId>> = vec![Vec::new(); k + 1];
    for i in 1..=k {
        let child = nodes[i - 1];
        let cl = g.local(child)?;
        let mut sibs: Vec<VarId> = g
            .parents_of(cl)
            .iter()
            .map(|&p| g.node_at(p))
            .filter(|&p| p != nodes[i])
            .collect();
        counters.edge_visits += g.parents_of(cl).len() as u64;
        sort_by_name(m, &mut sibs);
        siblings[i] = sibs;
    }
    Some(TreeDetection {
        path: TreePath { nodes, siblings },
        max_in_degree: max_in,
    })
}

/// For each level `i ≥ 1` and stored subset, every `(w, p')` pair that
/// generated it. Recorded by [`build_tree_relations_traced`] so witnesses
/// can be reconstructed and the generating conditions re-verified.
#[derive(Debug, Clone, Default)]
pub struct TreeGenerators {
    pub per_level: Vec<std::collections::BTreeMap<BTreeSet<Value>, Vec<(Vec<Value>, BTreeSet<Value>)>>>,
}

/// Builds `R^0 … R^k` for the path under context `u` and root value `y`.
pub fn build_tree_relations(
    m: &CausalModel,
    tp: &TreePath,
    u: &Assignment,
    y: Value,
) -> Result<(TreeRelation, RelationStats)> {
    let (rel, stats, _) = build_levels(m, tp, u, y, false)?;
    Ok((rel, stats))
}

/// Like [`build_tree_relations`], additionally recording every generator.
pub fn build_tree_relations_traced(
    m: &CausalModel,
    tp: &TreePath,
    u: &Assignment,
    y: Value,
) -> Result<(TreeRelation, RelationStats, TreeGenerators)> {
    build_levels(m, tp, u, y, true)
}

fn build_levels(
    m: &CausalModel,
    tp: &TreePath,
    u: &Assignment,
    y: Value,
    record: bool,
) -> Result<(TreeRelation, RelationStats, TreeGenerators)> {
    let k = tp.depth();
    let actual = m.evaluate(u)?;
    let mut ev = Evaluator::new(m);
    ev.set_context(u)?;

    let root = tp.nodes[0];
    let mut levels: Vec<BTreeSet<BTreeSet<Value>>> = Vec::with_capacity(k + 1);
    let mut r0: BTreeSet<BTreeSet<Value>> = BTreeSet::new();
    r0.insert(
        m.domain(root)
            .values()
            .filter(|v| *v != y)
            .collect::<BTreeSet<Value>>(),
    );
    levels.push(r0);

    let mut stats = RelationStats {
        evals_per_level: vec![0; k + 1],
        sizes_per_level: vec![1; k + 1],
    };
    let mut generators = TreeGenerators {
        per_level: vec![Default::default(); k + 1],
    };

    for i in 1..=k {
        if levels[i - 1].is_empty() {
            // nothing can be generated further up
            stats.sizes_per_level[i] = 0;
            levels.push(BTreeSet::new());
            continue;
        }
        let child = tp.nodes[i - 1];
        let parent = tp.nodes[i];
        let sibs = &tp.siblings[i];
        let actual_parent = actual.get(parent).expect("endogenous actual");
        let parent_values: Vec<Value> = m.domain(parent).values().collect();
        let mut level: BTreeSet<BTreeSet<Value>> = BTreeSet::new();
        let evals_before = ev.evals;

        for_each_value_tuple::<()>(m, sibs, |w| {
            // child's value with the path parent held at its actual value
            ev.begin();
            ev.intervene(parent, actual_parent);
            for (s, wv) in sibs.iter().zip(w) {
                ev.intervene(*s, *wv);
            }
            let guard_val = ev.value(child)?;
            // child's value for every candidate parent value
            let mut child_val = Vec::with_capacity(parent_values.len());
            for &pv in &parent_values {
                ev.begin();
                ev.intervene(parent, pv);
                for (s, wv) in sibs.iter().zip(w) {
                    ev.intervene(*s, *wv);
                }
                child_val.push(ev.value(child)?);
            }
            for prev in &levels[i - 1] {
                if prev.contains(&guard_val) {
                    continue;
                }
                let p_new: BTreeSet<Value> = parent_values
                    .iter()
                    .copied()
                    .filter(|pv| prev.contains(&child_val[pv.index()]))
                    .collect();
                if record {
                    generators.per_level[i]
                        .entry(p_new.clone())
                        .or_default()
                        .push((w.to_vec(), prev.clone()));
                }
                level.insert(p_new);
            }
            Ok(None)
        })?;

        stats.evals_per_level[i] = ev.evals - evals_before;
        stats.sizes_per_level[i] = level.len();
        levels.push(level);
    }

    Ok((TreeRelation { levels }, stats, generators))
}

/// Theorem-level decision on a detected tree.
pub fn decide_on_tree(
    m: &CausalModel,
    tp: &TreePath,
    x: Value,
    y: Value,
    u: &Assignment,
) -> Result<bool> {
    let actual = m.evaluate(u)?;
    let x_var = *tp.nodes.last().expect("path nonempty");
    let y_var = tp.nodes[0];
    if actual.get(x_var) != Some(x) || actual.get(y_var) != Some(y) {
        return Ok(false);
    }
    let (rel, _) = build_tree_relations(m, tp, u, y)?;
    let top = rel.levels.last().expect("levels nonempty");
    Ok(top.iter().any(|p| !p.is_empty() && !p.contains(&x)))
}

/// Detects the tree and decides; reports not-applicable when `(X, Y)` does
/// not induce a directed tree rooted at `Y`.
pub fn is_weak_cause_tree(
    m: &CausalModel,
    x_var: VarId,
    x: Value,
    y_var: VarId,
    y: Value,
    u: &Assignment,
) -> Result<bool> {
    let det = detect_tree(m, x_var, y_var).ok_or_else(|| Error::NotApplicable {
        algorithm: "tree".into(),
        reason: format!(
            "the relevant graph for ({}, {}) is not a directed tree rooted at {}",
            m.name(x_var),
            m.name(y_var),
            m.name(y_var)
        ),
    })?;
    decide_on_tree(m, &det.path, x, y, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{arson, identity_chain};
    use crate::model::ModelBuilder;

    #[test]
    fn detect_arson_tree() {
        let m = arson();
        let a1 = m.lookup("A1").unwrap();
        let b = m.lookup("B").unwrap();
        let det = detect_tree(&m, a1, b).unwrap();
        assert_eq!(det.path.depth(), 1);
        assert_eq!(det.path.nodes, vec![b, a1]);
        let sib_names: Vec<&str> = det.path.siblings[1].iter().map(|&v| m.name(v)).collect();
        assert_eq!(sib_names, vec!["A2"]);
        assert_eq!(det.max_in_degree, 2);
    }

    #[test]
    fn diamond_is_not_a_tree() {
        let m = ModelBuilder::new()
            .exogenous("U", ["0", "1"])
            .endogenous("X", ["0", "1"], &["U"], ["0", "1"])
            .endogenous("A", ["0", "1"], &["X"], ["0", "1"])
            .endogenous("B", ["0", "1"], &["X"], ["0", "1"])
            .endogenous_fn("Y", ["0", "1"], &["A", "B"], |p| {
                if p[0] == "1" && p[1] == "1" {
                    "1".into()
                } else {
                    "0".into()
                }
            })
            .build()
            .unwrap();
        let x = m.lookup("X").unwrap();
        let y = m.lookup("Y").unwrap();
        assert!(detect_tree(&m, x, y).is_none());
        assert!(detect_tree(&m, x, x).is_none());
    }

    #[test]
    fn arson_tree_relation_levels() {
        let m = arson();
        let a1 = m.lookup("A1").unwrap();
        let b = m.lookup("B").unwrap();
        let det = detect_tree(&m, a1, b).unwrap();
        let u = m.parse_bindings("U1=1,U2=1").unwrap();
        let (rel, _) = build_tree_relations(&m, &det.path, &u, Value(1)).unwrap();
        // R^0 = {{0}}
        let r0: Vec<Vec<Value>> = rel.levels[0].iter().map(|s| s.iter().copied().collect()).collect();
        assert_eq!(r0, vec![vec![Value(0)]]);
        // R^1 = {{0}, ∅}: A2 := 0 gives {0}; A2 := 1 gives ∅
        let r1: Vec<Vec<Value>> = rel.levels[1].iter().map(|s| s.iter().copied().collect()).collect();
        assert_eq!(r1, vec![vec![], vec![Value(0)]]);
    }

    #[test]
    fn chain_identity_relation() {
        let m = identity_chain();
        let x2 = m.lookup("X2").unwrap();
        let y = m.lookup("Y").unwrap();
        let det = detect_tree(&m, x2, y).unwrap();
        let u = m.parse_bindings("U=1").unwrap();
        let (rel, _) = build_tree_relations(&m, &det.path, &u, Value(1)).unwrap();
        let r1: Vec<Vec<Value>> = rel.levels[1].iter().map(|s| s.iter().copied().collect()).collect();
        assert_eq!(r1, vec![vec![Value(0)]]);
    }

    #[test]
    fn arson_decisions_via_tree() {
        let m = arson();
        let a1 = m.lookup("A1").unwrap();
        let a2 = m.lookup("A2").unwrap();
        let b = m.lookup("B").unwrap();
        let u11 = m.parse_bindings("U1=1,U2=1").unwrap();
        assert!(is_weak_cause_tree(&m, a1, Value(1), b, Value(1), &u11).unwrap());
        let u10 = m.parse_bindings("U1=1,U2=0").unwrap();
        assert!(!is_weak_cause_tree(&m, a2, Value(1), b, Value(1), &u10).unwrap());
        // (α) fails when y is not the actual value
        assert!(!is_weak_cause_tree(&m, a1, Value(1), b, Value(0), &u11).unwrap());
    }

    #[test]
    fn single_valued_root_never_caused() {
        let m = ModelBuilder::new()
            .exogenous("U", ["0", "1"])
            .endogenous("X", ["0", "1"], &["U"], ["0", "1"])
            .endogenous("Y", ["only"], &["X"], ["only", "only"])
            .build()
            .unwrap();
        let x = m.lookup("X").unwrap();
        let y = m.lookup("Y").unwrap();
        let u = m.parse_bindings("U=1").unwrap();
        let det = detect_tree(&m, x, y).unwrap();
        let (rel, _) = build_tree_relations(&m, &det.path, &u, Value(0)).unwrap();
        // R^0 = {∅} and the recursion can only reproduce ∅
        assert!(rel.levels[1].iter().all(|p| p.is_empty()));
        assert!(!is_weak_cause_tree(&m, x, Value(1), y, Value(0), &u).unwrap());
    }
}
