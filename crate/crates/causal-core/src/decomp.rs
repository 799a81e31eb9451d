//! Weak-cause decision via chain decompositions of the endogenous graph.
//!
//! A decomposition is an ordered list `((T^0, S^0), …, (T^k, S^k))` of block
//! pairs satisfying D1–D6: the `T^i` partition `V`, each `S^i ⊆ T^i`, the
//! event lives in `T^0` and the cause in `S^k`, and all edges respect the
//! chain so that the cut sets `S^i` are the only interface between
//! consecutive blocks.
//!
//! Through the chain, relations `R^i` of triples `(𝐩, 𝐪, F)` are
//! propagated, where `F ⊆ S^i` and `𝐩` (resp. `𝐪`) collects the values of
//! `F` that keep the falsifying (resp. restoring) side of AC2 achievable at
//! the interface. `X = x` is a weak cause iff AC1 holds and some
//! `(𝐩, 𝐪, X)` at the top has `𝐩 ≠ ∅` and `x ∈ 𝐪`.
//!
//! Interventions written `[q(Ẑ(u))]_w` are implemented as the merge: first
//! `F := q`, then actual values over `Ẑ` (overriding on overlap), then
//! `W := w`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::iterate::{for_each_subset, for_each_value_tuple, sort_by_name, value_tuples};
use crate::model::{Assignment, CausalModel, Evaluator, Value, VarId, VarKind};
use crate::oracle::{ac1_holds, BruteOptions, CauseQuery};
use crate::reduction::{classify_relevance, RelevanceClass, ReducedModel};
use crate::tree::RelationStats;

/// An ordered list of `(T^i, S^i)` pairs, index 0 holding the event block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Each pair `(T^i, S^i)`, members sorted by id.
    pub pairs: Vec<(Vec<VarId>, Vec<VarId>)>,
}

impl Decomposition {
    pub fn new(mut pairs: Vec<(Vec<VarId>, Vec<VarId>)>) -> Self {
        for (t, s) in pairs.iter_mut() {
            t.sort();
            t.dedup();
            s.sort();
            s.dedup();
        }
        Decomposition { pairs }
    }

    pub fn depth(&self) -> usize {
        self.pairs.len() - 1
    }

    pub fn max_block(&self) -> usize {
        self.pairs.iter().map(|(t, _)| t.len()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompCondition {
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
}

impl std::fmt::Display for DecompCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "D{}", *self as u8 + 1)
    }
}

/// First violated condition with the variables that witness it.
#[derive(Debug, Clone)]
pub struct DecompViolation {
    pub condition: DecompCondition,
    pub offenders: Vec<VarId>,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct DecompReport {
    pub valid: bool,
    pub violation: Option<DecompViolation>,
    pub max_block: usize,
}

/// Checks D1–D6 against the endogenous graph of `m` for the instance
/// `(X = x, φ)`; reports the first violation found, in condition order.
pub fn validate_decomposition(
    m: &CausalModel,
    cause_vars: &[VarId],
    phi: &Event,
    dec: &Decomposition,
) -> Result<DecompReport> {
    if dec.pairs.is_empty() {
        return Ok(report_violation(
            DecompCondition::D1,
            vec![],
            "a decomposition needs at least one block".into(),
            dec,
        ));
    }
    for (t, s) in &dec.pairs {
        for &v in t.iter().chain(s.iter()) {
            if v.index() >= m.var_count() {
                return Err(Error::UnknownVariable(format!("#{}", v.0)));
            }
            if m.kind(v) != VarKind::Endogenous {
                return Err(Error::UnknownVariable(m.name(v).to_string()));
            }
        }
    }
    let k = dec.depth();
    let n = m.var_count();
    // block index of every endogenous variable
    let mut block: Vec<Option<usize>> = vec![None; n];
    for (i, (t, _)) in dec.pairs.iter().enumerate() {
        for &v in t {
            if block[v.index()].is_some() {
                return Ok(report_violation(
                    DecompCondition::D1,
                    vec![v],
                    format!("`{}` appears in more than one block", m.name(v)),
                    dec,
                ));
            }
            block[v.index()] = Some(i);
        }
    }
    for v in m.endogenous_ids() {
        if block[v.index()].is_none() {
            return Ok(report_violation(
                DecompCondition::D1,
                vec![v],
                format!("`{}` appears in no block", m.name(v)),
                dec,
            ));
        }
    }
    let mut in_s: Vec<Option<usize>> = vec![None; n];
    for (i, (t, s)) in dec.pairs.iter().enumerate() {
        let tset: BTreeSet<VarId> = t.iter().copied().collect();
        for &v in s {
            if !tset.contains(&v) {
                return Ok(report_violation(
                    DecompCondition::D2,
                    vec![v],
                    format!("`{}` is in S^{} but not in T^{}", m.name(v), i, i),
                    dec,
                ));
            }
            in_s[v.index()] = Some(i);
        }
    }
    for v in phi.vars() {
        if block[v.index()] != Some(0) {
            return Ok(report_violation(
                DecompCondition::D3,
                vec![v],
                format!("event variable `{}` is not in T^0", m.name(v)),
                dec,
            ));
        }
    }
    let top: BTreeSet<VarId> = dec.pairs[k].1.iter().copied().collect();
    for &v in cause_vars {
        if !top.contains(&v) {
            return Ok(report_violation(
                DecompCondition::D3,
                vec![v],
                format!("cause variable `{}` is not in S^{}", m.name(v), k),
                dec,
            ));
        }
    }
    // D4: cross-block edges only between adjacent blocks, with the
    // lower endpoint in its block's cut set.
    for child in m.endogenous_ids() {
        for &parent in m.parents(child) {
            if m.kind(parent) != VarKind::Endogenous {
                continue;
            }
            let bp = block[parent.index()].unwrap();
            let bc = block[child.index()].unwrap();
            if bp == bc {
                continue;
            }
            let (lo, lo_var, hi) = if bp < bc {
                (bp, parent, bc)
            } else {
                (bc, child, bp)
            };
            if hi >= lo + 2 || in_s[lo_var.index()] != Some(lo) {
                return Ok(report_violation(
                    DecompCondition::D4,
                    vec![parent, child],
                    format!(
                        "edge {} -> {} connects T^{} and T^{} across the chain",
                        m.name(parent),
                        m.name(child),
                        bp,
                        bc
                    ),
                    dec,
                ));
            }
        }
    }
    // D5: children of S^i stay in (T^i \ S^i) ∪ S^{i-1} (just T^0 \ S^0 for
    // i = 0).
    for (i, (_, s)) in dec.pairs.iter().enumerate() {
        for &v in s {
            for &c in m.children(v) {
                let ok = if block[c.index()] == Some(i) {
                    in_s[c.index()] != Some(i)
                } else if i >= 1 && block[c.index()] == Some(i - 1) {
                    in_s[c.index()] == Some(i - 1)
                } else {
                    false
                };
                if !ok {
                    return Ok(report_violation(
                        DecompCondition::D5,
                        vec![v, c],
                        format!(
                            "child `{}` of cut variable `{}` escapes the chain",
                            m.name(c),
                            m.name(v)
                        ),
                        dec,
                    ));
                }
            }
        }
    }
    // D6: parents of S^i (i < k) lie in T^{i+1}; the top cut is parentless.
    for (i, (_, s)) in dec.pairs.iter().enumerate() {
        for &v in s {
            for &p in m.parents(v) {
                if m.kind(p) != VarKind::Endogenous {
                    continue;
                }
                let ok = i < k && block[p.index()] == Some(i + 1);
                if !ok {
                    let detail = if i == k {
                        format!(
                            "top cut variable `{}` has endogenous parent `{}`",
                            m.name(v),
                            m.name(p)
                        )
                    } else {
                        format!(
                            "parent `{}` of cut variable `{}` is not in T^{}",
                            m.name(p),
                            m.name(v),
                            i + 1
                        )
                    };
                    return Ok(report_violation(
                        DecompCondition::D6,
                        vec![p, v],
                        detail,
                        dec,
                    ));
                }
            }
        }
    }
    Ok(DecompReport {
        valid: true,
        violation: None,
        max_block: dec.max_block(),
    })
}

fn report_violation(
    condition: DecompCondition,
    offenders: Vec<VarId>,
    detail: String,
    dec: &Decomposition,
) -> DecompReport {
    DecompReport {
        valid: false,
        violation: Some(DecompViolation {
            condition,
            offenders,
            detail,
        }),
        max_block: dec.max_block(),
    }
}

/// A triple `(𝐩, 𝐪, F)`: value tuples are aligned with `f`, which is sorted
/// by id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Triple {
    pub f: Vec<VarId>,
    pub p: BTreeSet<Vec<Value>>,
    pub q: BTreeSet<Vec<Value>>,
}

#[derive(Debug, Clone)]
pub struct TripleRelation {
    pub levels: Vec<BTreeSet<Triple>>,
}

/// Builds the triple relations `R^0 … R^k` for a valid decomposition.
pub fn build_triple_relations(
    m: &CausalModel,
    dec: &Decomposition,
    phi: &Event,
    u: &Assignment,
    opts: &BruteOptions,
) -> Result<(TripleRelation, RelationStats)> {
    if dec.max_block() > opts.cap {
        return Err(Error::CapExceeded {
            size: dec.max_block(),
            cap: opts.cap,
        });
    }
    let k = dec.depth();
    let top_cut: BTreeSet<VarId> = dec.pairs[k].1.iter().copied().collect();
    let actual = m.evaluate(u)?;
    let mut ev = Evaluator::new(m);
    ev.set_context(u)?;
    let mut stats = RelationStats {
        evals_per_level: vec![0; k + 1],
        sizes_per_level: vec![0; k + 1],
    };
    let mut levels: Vec<BTreeSet<Triple>> = Vec::with_capacity(k + 1);

    for i in 0..=k {
        let evals_before = ev.evals;
        let (t_i, s_i) = &dec.pairs[i];
        let mut s_sorted = s_i.clone();
        sort_by_name(m, &mut s_sorted);
        let mut t_extra: Vec<VarId> = t_i.iter().copied().filter(|v| !s_i.contains(v)).collect();
        sort_by_name(m, &mut t_extra);

        let mut level: BTreeSet<Triple> = BTreeSet::new();
        for_each_subset::<()>(s_sorted.len(), |f_idx| {
            let f_vars: Vec<VarId> = {
                let mut f: Vec<VarId> = f_idx.iter().map(|&j| s_sorted[j]).collect();
                f.sort();
                f
            };
            let w_cut: Vec<VarId> = s_sorted
                .iter()
                .copied()
                .filter(|v| !f_vars.contains(v))
                .collect();
            let f_tuples = value_tuples(m, &f_vars);
            for_each_subset::<()>(t_extra.len(), |extra_idx| {
                let mut w_vars: Vec<VarId> = w_cut.clone();
                w_vars.extend(extra_idx.iter().map(|&j| t_extra[j]));
                sort_by_name(m, &mut w_vars);
                let z_range: Vec<VarId> = t_i
                    .iter()
                    .copied()
                    .filter(|v| !top_cut.contains(v) && !w_vars.contains(v))
                    .collect();
                for_each_value_tuple::<()>(m, &w_vars, |w| {
                    if let Some(d) = opts.deadline {
                        if std::time::Instant::now() >= d {
                            return Err(Error::TimedOut);
                        }
                    }
                    if i == 0 {
                        let (p, q) = sift_tuples(
                            m,
                            &mut ev,
                            &f_vars,
                            &f_tuples,
                            &w_vars,
                            w,
                            &z_range,
                            &actual,
                            |ev| Ok(!ev.holds(phi)?),
                            |ev| ev.holds(phi),
                        )?;
                        level.insert(Triple {
                            f: f_vars.clone(),
                            p,
                            q,
                        });
                    } else {
                        for prev in &levels[i - 1] {
                            let fp = &prev.f;
                            let (p, q) = sift_tuples(
                                m,
                                &mut ev,
                                &f_vars,
                                &f_tuples,
                                &w_vars,
                                w,
                                &z_range,
                                &actual,
                                |ev| Ok(prev.p.contains(&read_tuple(ev, fp)?)),
                                |ev| Ok(prev.q.contains(&read_tuple(ev, fp)?)),
                            )?;
                            level.insert(Triple {
                                f: f_vars.clone(),
                                p,
                                q,
                            });
                        }
                    }
                    Ok(None)
                })?;
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

fn read_tuple(ev: &mut Evaluator, vars: &[VarId]) -> Result<Vec<Value>> {
    vars.iter().map(|&v| ev.value(v)).collect()
}

/// Collects the `𝐩` and `𝐪` sides for one `(F, W, w)` choice: a tuple joins
/// `𝐩` when the plain intervention satisfies `falsify`, and `𝐪` when every
/// actual-value override over the poke range satisfies `restore`.
#[allow(clippy::too_many_arguments)]
fn sift_tuples(
    m: &CausalModel,
    ev: &mut Evaluator,
    f_vars: &[VarId],
    f_tuples: &[Vec<Value>],
    w_vars: &[VarId],
    w: &[Value],
    z_range: &[VarId],
    actual: &Assignment,
    mut falsify: impl FnMut(&mut Evaluator) -> Result<bool>,
    mut restore: impl FnMut(&mut Evaluator) -> Result<bool>,
) -> Result<(BTreeSet<Vec<Value>>, BTreeSet<Vec<Value>>)> {
    let mut p_set = BTreeSet::new();
    let mut q_set = BTreeSet::new();
    for ft in f_tuples {
        ev.begin();
        for (v, val) in f_vars.iter().zip(ft) {
            ev.intervene(*v, *val);
        }
        for (v, val) in w_vars.iter().zip(w) {
            ev.intervene(*v, *val);
        }
        if falsify(ev)? {
            p_set.insert(ft.clone());
        }
        let ok = for_each_subset(z_range.len(), |z_idx| {
            ev.begin();
            for (v, val) in f_vars.iter().zip(ft) {
                ev.intervene(*v, *val);
            }
            // actual values override the candidate tuple on overlap
            for &zi in z_idx {
                let zv = z_range[zi];
                ev.intervene(zv, actual.get(zv).expect("endogenous actual"));
            }
            for (v, val) in w_vars.iter().zip(w) {
                ev.intervene(*v, *val);
            }
            if restore(ev)? {
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
    let _ = m;
    Ok((p_set, q_set))
}

/// Theorem-level decision for a validated decomposition.
pub fn is_weak_cause_decomposed(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    u: &Assignment,
    dec: &Decomposition,
    opts: &BruteOptions,
) -> Result<bool> {
    let mut cause_vars: Vec<VarId> = cause.vars().collect();
    cause_vars.sort();
    let report = validate_decomposition(m, &cause_vars, phi, dec)?;
    if let Some(v) = report.violation {
        return Err(Error::InvalidDecomposition {
            condition: v.condition.to_string(),
            detail: v.detail,
        });
    }
    let q = CauseQuery::new(m, cause, u, phi.clone())?;
    if !ac1_holds(&q)? {
        return Ok(false);
    }
    let (rel, _) = build_triple_relations(m, dec, phi, u, opts)?;
    let x_tuple: Vec<Value> = cause_vars.iter().map(|v| cause.get(*v).unwrap()).collect();
    Ok(rel
        .levels
        .last()
        .expect("levels nonempty")
        .iter()
        .any(|t| t.f == cause_vars && !t.p.is_empty() && t.q.contains(&x_tuple)))
}

/// The trivial decomposition `((V', X))` of a reduced model, available when
/// no cause member lies on a path from another cause member to the event.
pub fn trivial_decomposition(
    reduced: &ReducedModel,
    cause_vars: &[VarId],
    phi: &Event,
) -> Option<Decomposition> {
    let m = &reduced.model;
    let classification = classify_relevance(m, cause_vars, phi);
    if cause_vars
        .iter()
        .any(|&v| classification.class(v) != RelevanceClass::ClassI)
    {
        return None;
    }
    let all: Vec<VarId> = m.endogenous_ids().collect();
    Some(Decomposition::new(vec![(all, cause_vars.to_vec())]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::parse_event;
    use crate::fixtures::{arson, identity_chain};
    use crate::model::ModelBuilder;
    use crate::reduction::{reduce_model, DEFAULT_TABLE_BUDGET};

    fn reduced_arson(cause: &str) -> (CausalModel, ReducedModel, Vec<VarId>) {
        let m = arson();
        let phi = parse_event(&m, "B=1").unwrap();
        let x = m.parse_bindings(cause).unwrap();
        let vars: Vec<VarId> = x.vars().collect();
        let red = reduce_model(&m, &vars, &phi, DEFAULT_TABLE_BUDGET).unwrap();
        let mapped: Vec<VarId> = vars.iter().map(|&v| red.map(v).unwrap()).collect();
        (m, red, mapped)
    }

    #[test]
    fn trivial_decomposition_on_reduced_arson() {
        let (m, red, mapped) = reduced_arson("A1=1,A2=1");
        let phi = red
            .map_event(&parse_event(&m, "B=1").unwrap(), &m)
            .unwrap();
        let dec = trivial_decomposition(&red, &mapped, &phi).unwrap();
        assert_eq!(dec.depth(), 0);
        let report = validate_decomposition(&red.model, &mapped, &phi, &dec).unwrap();
        assert!(report.valid, "{:?}", report.violation);
        assert_eq!(report.max_block, 3);
    }

    #[test]
    fn trivial_decomposition_absent_on_chain() {
        let m = identity_chain();
        let phi = parse_event(&m, "Y=1").unwrap();
        let x1 = m.lookup("X1").unwrap();
        let x2 = m.lookup("X2").unwrap();
        let red = reduce_model(&m, &[x1, x2], &phi, DEFAULT_TABLE_BUDGET).unwrap();
        let mapped: Vec<VarId> = [x1, x2].iter().map(|&v| red.map(v).unwrap()).collect();
        let phi_r = red.map_event(&phi, &m).unwrap();
        assert!(trivial_decomposition(&red, &mapped, &phi_r).is_none());
    }

    #[test]
    fn layered_chain_decomposition_validates() {
        let m = identity_chain();
        let phi = parse_event(&m, "Y=1").unwrap();
        let x1 = m.lookup("X1").unwrap();
        let x2 = m.lookup("X2").unwrap();
        let y = m.lookup("Y").unwrap();
        let dec = Decomposition::new(vec![
            (vec![y], vec![y]),
            (vec![x2], vec![x2]),
            (vec![x1], vec![x1]),
        ]);
        let report = validate_decomposition(&m, &[x1], &phi, &dec).unwrap();
        assert!(report.valid, "{:?}", report.violation);
    }

    #[test]
    fn skipping_edge_violates_d4() {
        // X -> A -> Y plus the shortcut X -> Y, split into three blocks:
        // the shortcut spans two levels.
        let m = ModelBuilder::new()
            .exogenous("U", ["0", "1"])
            .endogenous("X", ["0", "1"], &["U"], ["0", "1"])
            .endogenous("A", ["0", "1"], &["X"], ["0", "1"])
            .endogenous_fn("Y", ["0", "1"], &["A", "X"], |p| {
                if p[0] == "1" || p[1] == "1" {
                    "1".into()
                } else {
                    "0".into()
                }
            })
            .build()
            .unwrap();
        let x = m.lookup("X").unwrap();
        let a = m.lookup("A").unwrap();
        let y = m.lookup("Y").unwrap();
        let phi = parse_event(&m, "Y=1").unwrap();
        let dec = Decomposition::new(vec![
            (vec![y], vec![y]),
            (vec![a], vec![a]),
            (vec![x], vec![x]),
        ]);
        let report = validate_decomposition(&m, &[x], &phi, &dec).unwrap();
        assert!(!report.valid);
        assert_eq!(report.violation.unwrap().condition, DecompCondition::D4);
    }

    #[test]
    fn triple_relation_matches_hand_computation() {
        // reduced arson, trivial decomposition ((V', {A1}))
        let (m, red, mapped) = reduced_arson("A1=1");
        let rm = &red.model;
        let phi = red
            .map_event(&parse_event(&m, "B=1").unwrap(), &m)
            .unwrap();
        let dec = trivial_decomposition(&red, &mapped, &phi).unwrap();
        let u = rm.parse_bindings("U1=1,U2=1").unwrap();
        let (rel, _) =
            build_triple_relations(rm, &dec, &phi, &u, &BruteOptions::default()).unwrap();
        // hand-checked member: F = {A1}, W = {A2}, w = 0 gives
        // 𝐩 = {0}, 𝐪 = {1}
        let a1 = rm.lookup("A1").unwrap();
        let expected = Triple {
            f: vec![a1],
            p: [vec![Value(0)]].into_iter().collect(),
            q: [vec![Value(1)]].into_iter().collect(),
        };
        assert!(
            rel.levels[0].contains(&expected),
            "missing hand-computed triple in {:?}",
            rel.levels[0]
        );
        // degenerate F = ∅ triples exist and stay within D(∅) = {()}
        assert!(rel.levels[0]
            .iter()
            .any(|t| t.f.is_empty() && t.p.len() <= 1 && t.q.len() <= 1));
    }

    #[test]
    fn decomposed_decision_matches_example() {
        let (m, red, mapped) = reduced_arson("A1=1");
        let rm = &red.model;
        let phi = red
            .map_event(&parse_event(&m, "B=1").unwrap(), &m)
            .unwrap();
        let dec = trivial_decomposition(&red, &mapped, &phi).unwrap();
        let u = rm.parse_bindings("U1=1,U2=1").unwrap();
        let cause = rm.parse_bindings("A1=1").unwrap();
        assert!(
            is_weak_cause_decomposed(rm, &cause, &phi, &u, &dec, &BruteOptions::default())
                .unwrap()
        );
        // AC1 violated: A1(u) = 0 under u = (0, 1)
        let u01 = rm.parse_bindings("U1=0,U2=1").unwrap();
        assert!(
            !is_weak_cause_decomposed(rm, &cause, &phi, &u01, &dec, &BruteOptions::default())
                .unwrap()
        );
    }

    #[test]
    fn decomposed_decision_conjunction() {
        let (m, red, mapped) = reduced_arson("A1=1,A2=1");
        let rm = &red.model;
        let phi = red
            .map_event(&parse_event(&m, "B=1").unwrap(), &m)
            .unwrap();
        let dec = trivial_decomposition(&red, &mapped, &phi).unwrap();
        let u = rm.parse_bindings("U1=1,U2=1").unwrap();
        let cause = rm.parse_bindings("A1=1,A2=1").unwrap();
        assert!(
            is_weak_cause_decomposed(rm, &cause, &phi, &u, &dec, &BruteOptions::default())
                .unwrap()
        );
    }
}
