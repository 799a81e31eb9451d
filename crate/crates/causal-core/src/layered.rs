//! Weak-cause decision on layered causal graphs.
//!
//! The relevant endogenous graph for `(X, Y)` is layered when it admits an
//! ordered partition `(S^0, …, S^k)` with every edge dropping exactly one
//! level (L1) and `S^0 = {Y}`, `X ⊆ S^k` (L2). Detection runs the sweep from
//! the proposition-6.2 proof: starting from `Δ = X`, each block is `Δ`
//! together with the parents of `Δ`'s children, and `Δ` advances to the
//! children; a final L1/L2 verification pass keeps the detector sound
//! regardless of how the sweep is read.
//!
//! On a layered graph the triple relations of the decomposition algorithm
//! simplify: `R^0 = {(D(Y) \ {y}, {y}, {Y})}`, and level `i` draws `F ⊆ S^i`,
//! `w ∈ D(S^i \ F)`, with pokes ranging over `F \ S^k` only.

use std::collections::BTreeSet;

use crate::decomp::{Decomposition, Triple, TripleRelation};
use crate::error::{Error, Result};
use crate::event::Event;
use crate::graph::{restrict_to_endogenous, CausalGraph, OpCounters};
use crate::iterate::{for_each_subset, for_each_value_tuple, sort_by_name, value_tuples};
use crate::model::{Assignment, CausalModel, Evaluator, Value, VarId};
use crate::oracle::{ac1_holds, BruteOptions, CauseQuery};
use crate::reduction::relevant_graph_counted;
use crate::tree::RelationStats;

/// An ordered partition `(S^0, …, S^k)` of the relevant endogenous graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layering {
    /// `layers[i]` is `S^i`; `layers[0]` is the root layer `{Y}`.
    pub layers: Vec<Vec<VarId>>,
}

impl Layering {
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Maximum layer size above the root, the width in the bounded-width
    /// sense.
    pub fn width(&self) -> usize {
        self.layers.iter().skip(1).map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct LayeredDetection {
    pub layering: Layering,
    pub width: usize,
}

/// Runs the layering sweep on the relevant graph of `(X, Y)` and verifies
/// L1/L2. Linear in the graph size; bails on the first repeated placement.
pub fn detect_layered(m: &CausalModel, cause_vars: &[VarId], y: VarId) -> Option<LayeredDetection> {
    detect_layered_counted(m, cause_vars, y, &mut OpCounters::default())
}

pub fn detect_layered_counted(
    m: &CausalModel,
    cause_vars: &[VarId],
    y: VarId,
    counters: &mut OpCounters,
) -> Option<LayeredDetection> {
    if cause_vars.is_empty() {
        return None;
    }
    let phi = Event::prim(y, Value(0));
    let g = restrict_to_endogenous(&relevant_graph_counted(m, cause_vars, &phi, counters));
    let layers = sweep(&g, cause_vars, counters)?;
    verify(&g, &layers, cause_vars, y, counters)?;
    let layering = Layering {
        layers: layers
            .into_iter()
            .map(|l| {
                let mut l: Vec<VarId> = l.into_iter().collect();
                sort_by_name(m, &mut l);
                l
            })
            .collect(),
    };
    let width = layering.width();
    Some(LayeredDetection { layering, width })
}

/// The sweep itself: blocks from the cause downwards, rejecting on the first
/// repeated placement. Returns layers in root-first order.
fn sweep(
    g: &CausalGraph,
    cause_vars: &[VarId],
    counters: &mut OpCounters,
) -> Option<Vec<Vec<VarId>>> {
    let n = g.node_count();
    let mut placed = vec![false; n];
    let mut in_block = vec![usize::MAX; n];
    let mut next_stamp = vec![usize::MAX; n];
    let mut delta: Vec<usize> = Vec::new();
    for &x in cause_vars {
        let xl = g.local(x)?;
        if next_stamp[xl] != 0 {
            next_stamp[xl] = 0;
            delta.push(xl);
        }
    }
    let mut blocks: Vec<Vec<VarId>> = Vec::new();
    let mut round = 0usize;
    while !delta.is_empty() {
        round += 1;
        if round > n + 1 {
            return None;
        }
        let bidx = blocks.len();
        let mut block: Vec<usize> = Vec::new();
        for &d in &delta {
            counters.node();
            if in_block[d] == bidx {
                continue;
            }
            if placed[d] {
                return None;
            }
            placed[d] = true;
            in_block[d] = bidx;
            block.push(d);
        }
        let mut next: Vec<usize> = Vec::new();
        for &d in &delta {
            for &c in g.children_of(d) {
                counters.edge();
                if in_block[c] == bidx {
                    // a child of the block inside the block: not layered
                    return None;
                }
                if next_stamp[c] != round {
                    next_stamp[c] = round;
                    next.push(c);
                }
                for &p in g.parents_of(c) {
                    counters.edge();
                    if in_block[p] == bidx {
                        continue;
                    }
                    if placed[p] {
                        return None;
                    }
                    placed[p] = true;
                    in_block[p] = bidx;
                    block.push(p);
                }
            }
        }
        blocks.push(block.iter().map(|&i| g.node_at(i)).collect());
        delta = next;
    }
    if placed.iter().any(|p| !p) {
        return None; // not a partition of the relevant graph
    }
    blocks.reverse();
    Some(blocks)
}

/// Final L1/L2 verification of a candidate layering.
fn verify(
    g: &CausalGraph,
    layers: &[Vec<VarId>],
    cause_vars: &[VarId],
    y: VarId,
    counters: &mut OpCounters,
) -> Option<()> {
    let n = g.node_count();
    let mut level = vec![usize::MAX; n];
    let mut seen = 0usize;
    for (i, layer) in layers.iter().enumerate() {
        for &v in layer {
            let l = g.local(v)?;
            if level[l] != usize::MAX {
                return None;
            }
            level[l] = i;
            seen += 1;
        }
    }
    if seen != n {
        return None;
    }
    // L1
    for i in 0..n {
        counters.node();
        for &c in g.children_of(i) {
            counters.edge();
            if level[i] != level[c] + 1 {
                return None;
            }
        }
    }
    // L2
    if layers[0].len() != 1 || layers[0][0] != y {
        return None;
    }
    let top: BTreeSet<VarId> = layers.last()?.iter().copied().collect();
    if !cause_vars.iter().all(|v| top.contains(v)) {
        return None;
    }
    Some(())
}

/// Promotes a layering to the decomposition `((S^0, S^0), …, (S^k, S^k))`.
pub fn natural_decomposition(layering: &Layering) -> Decomposition {
    Decomposition::new(
        layering
            .layers
            .iter()
            .map(|l| (l.clone(), l.clone()))
            .collect(),
    )
}

/// Builds the simplified layered relations for root value `y` under `u`.
pub fn build_layered_relations(
    m: &CausalModel,
    layering: &Layering,
    y: Value,
    u: &Assignment,
    opts: &BruteOptions,
) -> Result<(TripleRelation, RelationStats)> {
    let k = layering.depth();
    if layering.layers.iter().map(Vec::len).max().unwrap_or(0) > opts.cap {
        return Err(Error::CapExceeded {
            size: layering.width(),
            cap: opts.cap,
        });
    }
    let root = layering.layers[0][0];
    let top_cut: BTreeSet<VarId> = layering.layers[k].iter().copied().collect();
    let actual = m.evaluate(u)?;
    let mut ev = Evaluator::new(m);
    ev.set_context(u)?;

    let mut stats = RelationStats {
        evals_per_level: vec![0; k + 1],
        sizes_per_level: vec![0; k + 1],
    };
    let mut levels: Vec<BTreeSet<Triple>> = Vec::with_capacity(k + 1);
    let mut r0 = BTreeSet::new();
    r0.insert(Triple {
        f: vec![root],
        p: m
            .domain(root)
            .values()
            .filter(|v| *v != y)
            .map(|v| vec![v])
            .collect(),
        q: [vec![y]].into_iter().collect(),
    });
    stats.sizes_per_level[0] = 1;
    levels.push(r0);

    for i in 1..=k {
        let evals_before = ev.evals;
        let mut s_i = layering.layers[i].clone();
        sort_by_name(m, &mut s_i);
        let mut level: BTreeSet<Triple> = BTreeSet::new();
        for_each_subset::<()>(s_i.len(), |f_idx| {
            let f_vars: Vec<VarId> = {
                let mut f: Vec<VarId> = f_idx.iter().map(|&j| s_i[j]).collect();
                f.sort();
                f
            };
            let w_vars: Vec<VarId> = s_i
                .iter()
                .copied()
                .filter(|v| !f_vars.contains(v))
                .collect();
            let z_range: Vec<VarId> = f_vars
                .iter()
                .copied()
                .filter(|v| !top_cut.contains(v))
                .collect();
            let f_tuples = value_tuples(m, &f_vars);
            for_each_value_tuple::<()>(m, &w_vars, |w| {
                if let Some(d) = opts.deadline {
                    if std::time::Instant::now() >= d {
                        return Err(Error::TimedOut);
                    }
                }
                for prev in &levels[i - 1] {
                    let mut p_set = BTreeSet::new();
                    let mut q_set = BTreeSet::new();
                    for ft in &f_tuples {
                        ev.begin();
                        for (v, val) in f_vars.iter().zip(ft) {
                            ev.intervene(*v, *val);
                        }
                        for (v, val) in w_vars.iter().zip(w) {
                            ev.intervene(*v, *val);
                        }
                        let tup: Vec<Value> = prev
                            .f
                            .iter()
                            .map(|&v| ev.value(v))
                            .collect::<Result<_>>()?;
                        if prev.p.contains(&tup) {
                            p_set.insert(ft.clone());
                        }
                        let ok = for_each_subset(z_range.len(), |z_idx| {
                            ev.begin();
                            for (v, val) in f_vars.iter().zip(ft) {
                                ev.intervene(*v, *val);
                            }
                            for &zi in z_idx {
                                let zv = z_range[zi];
                                ev.intervene(zv, actual.get(zv).expect("endogenous actual"));
                            }
                            for (v, val) in w_vars.iter().zip(w) {
                                ev.intervene(*v, *val);
                            }
                            let tup: Vec<Value> = prev
                                .f
                                .iter()
                                .map(|&v| ev.value(v))
                                .collect::<Result<_>>()?;
                            if prev.q.contains(&tup) {
                                Ok(None)
                            } else {
                                Ok(Some(()))
                            }
                        })?
                        .is_none();
                        if ok {
                            q_set.insert(ft.clone());
                        }
                    }
                    level.insert(Triple {
                        f: f_vars.clone(),
                        p: p_set,
                        q: q_set,
                    });
                }
                Ok(None)
            })?;
            Ok(None)
        })?;
        stats.evals_per_level[i] = ev.evals - evals_before;
        stats.sizes_per_level[i] = level.len();
        levels.push(level);
    }
    Ok((TripleRelation { levels }, stats))
}

/// Theorem-level decision for a detected layering.
pub fn decide_on_layering(
    m: &CausalModel,
    layering: &Layering,
    cause: &Assignment,
    y_var: VarId,
    y: Value,
    u: &Assignment,
    opts: &BruteOptions,
) -> Result<bool> {
    let q = CauseQuery::new(m, cause, u, Event::prim(y_var, y))?;
    if !ac1_holds(&q)? {
        return Ok(false);
    }
    let (rel, _) = build_layered_relations(m, layering, y, u, opts)?;
    let mut cause_vars: Vec<VarId> = cause.vars().collect();
    cause_vars.sort();
    let x_tuple: Vec<Value> = cause_vars.iter().map(|v| cause.get(*v).unwrap()).collect();
    Ok(rel
        .levels
        .last()
        .expect("levels nonempty")
        .iter()
        .any(|t| t.f == cause_vars && !t.p.is_empty() && t.q.contains(&x_tuple)))
}

/// Detects the layering and decides; reports not-applicable when the graph
/// is not layered with respect to `(X, Y)`.
///
/// The theorem assumes the model coincides with its relevant reduction, so
/// the decision runs on the reduced model (the detected layers are the same
/// either way, but block-local evaluation is not: an irrelevant descendant
/// of the cause feeding a relevant parent would leak interventions across
/// blocks).
pub fn is_weak_cause_layered(
    m: &CausalModel,
    cause: &Assignment,
    y_var: VarId,
    y: Value,
    u: &Assignment,
    opts: &BruteOptions,
) -> Result<bool> {
    let cause_vars: Vec<VarId> = cause.vars().collect();
    let phi = Event::prim(y_var, y);
    let red = crate::reduction::reduce_model(
        m,
        &cause_vars,
        &phi,
        crate::reduction::DEFAULT_TABLE_BUDGET,
    )?;
    let cause_r = red.map_assignment(cause, m)?;
    let u_r = red.map_assignment(u, m)?;
    let y_r = red.map(y_var).expect("event variable is relevant");
    let cause_vars_r: Vec<VarId> = cause_r.vars().collect();
    let det =
        detect_layered(&red.model, &cause_vars_r, y_r).ok_or_else(|| Error::NotApplicable {
            algorithm: "layered".into(),
            reason: format!(
                "the relevant graph is not layered with respect to the cause and {}",
                m.name(y_var)
            ),
        })?;
    decide_on_layering(&red.model, &det.layering, &cause_r, y_r, y, &u_r, opts)
}
