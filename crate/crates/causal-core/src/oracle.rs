//! Brute-force, definition-level decision procedures for weak and actual
//! causes.
//!
//! `X = x` is a weak cause of `φ` under `u` iff
//!
//! - AC1: `X(u) = x` and `φ(u)`; and
//! - AC2: some `W ⊆ V \ X`, `x̄ ∈ D(X)`, `w ∈ D(W)` exist with
//!   (a) `¬φ_{x̄w}(u)`, and
//!   (b) `φ_{xwẑ}(u)` for all `Ẑ ⊆ V \ (X ∪ W)` with `ẑ = Ẑ(u)`.
//!
//! The actual values `ẑ = Ẑ(u)` are taken in the original, un-intervened
//! model. An actual cause additionally satisfies the minimality condition
//! AC3, which for singletons collapses to weak causality; `is_actual_cause`
//! uses that characterization, and `is_actual_cause_by_definition` keeps the
//! literal AC3 check for cross-validation.
//!
//! This module is the ground truth the tractable algorithms are verified
//! against. The search is exponential and guarded by a configurable cap on
//! `|V \ X|`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::iterate::{for_each_subset, for_each_value_tuple, sort_by_name};
use crate::model::{Assignment, CausalModel, Evaluator, VarId, VarKind};

/// A weak/actual-cause decision problem instance.
#[derive(Debug, Clone)]
pub struct CauseQuery<'m> {
    pub model: &'m CausalModel,
    /// Cause variables, sorted by name.
    pub cause_vars: Vec<VarId>,
    /// The candidate cause value `x` over `cause_vars`.
    pub cause_value: Assignment,
    /// Total context over the exogenous variables.
    pub context: Assignment,
    pub event: Event,
}

impl<'m> CauseQuery<'m> {
    pub fn new(
        model: &'m CausalModel,
        cause: &Assignment,
        context: &Assignment,
        event: Event,
    ) -> Result<Self> {
        if cause.is_empty() {
            return Err(Error::EmptyCauseSet);
        }
        for var in cause.vars() {
            if model.kind(var) != VarKind::Endogenous {
                return Err(Error::CauseNotEndogenous(model.name(var).to_string()));
            }
        }
        let mut cause_vars: Vec<VarId> = cause.vars().collect();
        sort_by_name(model, &mut cause_vars);
        Ok(CauseQuery {
            model,
            cause_vars,
            cause_value: cause.clone(),
            context: context.clone(),
            event,
        })
    }
}

/// A satisfying AC2 certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// The contingency set `W`, sorted by name.
    pub contingency_vars: Vec<VarId>,
    /// The alternative cause value `x̄` from AC2(a).
    pub alt_cause: Assignment,
    /// The contingency values `w`.
    pub contingency: Assignment,
}

/// Guardrails for the exponential search.
#[derive(Debug, Clone, Copy)]
pub struct BruteOptions {
    /// Refuse instances with `|V \ X|` above this.
    pub cap: usize,
    /// Abort the search when this instant passes.
    pub deadline: Option<Instant>,
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions {
            cap: 20,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchStats {
    /// Evaluation rounds performed.
    pub evaluations: u64,
    /// `(W, x̄, w)` candidates examined.
    pub candidates: u64,
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub is_cause: bool,
    pub witness: Option<Witness>,
    pub stats: SearchStats,
}

/// AC1: `X(u) = x` and `φ(u)`.
pub fn ac1_holds(q: &CauseQuery) -> Result<bool> {
    let actual = q.model.evaluate(&q.context)?;
    for (var, val) in q.cause_value.iter() {
        if actual.get(var) != Some(val) {
            return Ok(false);
        }
    }
    q.model.holds(&q.context, &q.event)
}

fn check_deadline(opts: &BruteOptions) -> Result<()> {
    if let Some(d) = opts.deadline {
        if Instant::now() >= d {
            return Err(Error::TimedOut);
        }
    }
    Ok(())
}

/// Exhaustive AC1/AC2 check. Returns the decision together with the first
/// witness in the fixed search order (`W` by size then lexicographically,
/// `x̄` and `w` lexicographically by domain order), which makes the result
/// deterministic.
pub fn is_weak_cause_bruteforce(q: &CauseQuery, opts: &BruteOptions) -> Result<OracleOutcome> {
    let m = q.model;
    let mut rest: Vec<VarId> = m
        .endogenous_ids()
        .filter(|v| !q.cause_value.binds(*v))
        .collect();
    sort_by_name(m, &mut rest);
    if rest.len() > opts.cap {
        return Err(Error::CapExceeded {
            size: rest.len(),
            cap: opts.cap,
        });
    }

    let mut stats = SearchStats::default();
    if !ac1_holds(q)? {
        return Ok(OracleOutcome {
            is_cause: false,
            witness: None,
            stats,
        });
    }

    let actual = m.evaluate(&q.context)?;
    let mut ev = Evaluator::new(m);
    ev.set_context(&q.context)?;

    let found = for_each_subset(rest.len(), |w_idx| {
        check_deadline(opts)?;
        let w_vars: Vec<VarId> = w_idx.iter().map(|&i| rest[i]).collect();
        let z_cands: Vec<VarId> = rest
            .iter()
            .copied()
            .filter(|v| !w_vars.contains(v))
            .collect();
        for_each_value_tuple(m, &q.cause_vars, |x_bar| {
            for_each_value_tuple(m, &w_vars, |w_vals| {
                stats.candidates += 1;
                if stats.candidates % 512 == 0 {
                    check_deadline(opts)?;
                }
                // AC2(a): ¬φ_{x̄w}(u)
                ev.begin();
                for (i, &v) in q.cause_vars.iter().enumerate() {
                    ev.intervene(v, x_bar[i]);
                }
                for (i, &v) in w_vars.iter().enumerate() {
                    ev.intervene(v, w_vals[i]);
                }
                if ev.holds(&q.event)? {
                    return Ok(None);
                }
                // AC2(b): φ_{xwẑ}(u) for every Ẑ ⊆ V \ (X ∪ W), by
                // increasing size so the Ẑ = ∅ necessary condition is
                // checked first.
                let mut z_rounds = 0u32;
                let violated = for_each_subset(z_cands.len(), |z_idx| {
                    z_rounds += 1;
                    if z_rounds % 1024 == 0 {
                        check_deadline(opts)?;
                    }
                    ev.begin();
                    ev.intervene_all(&q.cause_value);
                    for (i, &v) in w_vars.iter().enumerate() {
                        ev.intervene(v, w_vals[i]);
                    }
                    for &zi in z_idx {
                        let zv = z_cands[zi];
                        ev.intervene(zv, actual.get(zv).expect("endogenous actual"));
                    }
                    if ev.holds(&q.event)? {
                        Ok(None)
                    } else {
                        Ok(Some(()))
                    }
                })?
                .is_some();
                if violated {
                    return Ok(None);
                }
                let witness = Witness {
                    contingency_vars: w_vars.clone(),
                    alt_cause: Assignment::from_pairs(
                        q.cause_vars.iter().copied().zip(x_bar.iter().copied()),
                    ),
                    contingency: Assignment::from_pairs(
                        w_vars.iter().copied().zip(w_vals.iter().copied()),
                    ),
                };
                Ok(Some(witness))
            })
        })
    })?;

    stats.evaluations = ev.evals;
    Ok(OracleOutcome {
        is_cause: found.is_some(),
        witness: found,
        stats,
    })
}

/// Convenience wrapper returning just the decision.
pub fn is_weak_cause(q: &CauseQuery, opts: &BruteOptions) -> Result<bool> {
    Ok(is_weak_cause_bruteforce(q, opts)?.is_cause)
}

/// Actual cause via the singleton characterization: `X = x` is an actual
/// cause iff `X` is a singleton and a weak cause.
pub fn is_actual_cause(q: &CauseQuery, opts: &BruteOptions) -> Result<bool> {
    if q.cause_vars.len() != 1 {
        return Ok(false);
    }
    is_weak_cause(q, opts)
}

/// Literal AC3: a weak cause none of whose nonempty proper subsets satisfies
/// AC1 and AC2. Kept for cross-validation of the singleton characterization.
pub fn is_actual_cause_by_definition(q: &CauseQuery, opts: &BruteOptions) -> Result<bool> {
    if !is_weak_cause(q, opts)? {
        return Ok(false);
    }
    let n = q.cause_vars.len();
    let minimal = for_each_subset(n, |idx| {
        if idx.is_empty() || idx.len() == n {
            return Ok(None);
        }
        let sub_vars: Vec<VarId> = idx.iter().map(|&i| q.cause_vars[i]).collect();
        let sub_value = q.cause_value.restrict(sub_vars.iter().copied());
        let sub = CauseQuery {
            model: q.model,
            cause_vars: sub_vars,
            cause_value: sub_value,
            context: q.context.clone(),
            event: q.event.clone(),
        };
        if is_weak_cause(&sub, opts)? {
            Ok(Some(()))
        } else {
            Ok(None)
        }
    })?
    .is_none();
    Ok(minimal)
}

/// Re-checks a witness against AC2(a) and AC2(b) by direct evaluation.
pub fn check_witness(q: &CauseQuery, witness: &Witness) -> Result<bool> {
    let m = q.model;
    for v in &witness.contingency_vars {
        if q.cause_value.binds(*v) {
            return Ok(false);
        }
    }
    let actual = m.evaluate(&q.context)?;
    let xw = crate::model::merge(&witness.alt_cause, &witness.contingency);
    if m.holds_intervened(&xw, &q.context, &q.event)? {
        return Ok(false);
    }
    let mut z_cands: Vec<VarId> = m
        .endogenous_ids()
        .filter(|v| !q.cause_value.binds(*v) && !witness.contingency.binds(*v))
        .collect();
    sort_by_name(m, &mut z_cands);
    let ok = for_each_subset(z_cands.len(), |z_idx| {
        let mut itv = crate::model::merge(&q.cause_value, &witness.contingency);
        for &zi in z_idx {
            let zv = z_cands[zi];
            itv.bind(zv, actual.get(zv).expect("endogenous actual"));
        }
        if m.holds_intervened(&itv, &q.context, &q.event)? {
            Ok(None)
        } else {
            Ok(Some(()))
        }
    })?
    .is_none();
    Ok(ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CauseMode {
    Weak,
    Actual,
}

/// Enumerates all causes `X' = x'` with `X' ⊆ candidates`, ordered by
/// `|X'|`, then lexicographically by variable names, then by value tuples in
/// domain order.
pub fn enumerate_causes(
    m: &CausalModel,
    candidates: &[VarId],
    u: &Assignment,
    phi: &Event,
    mode: CauseMode,
    opts: &BruteOptions,
) -> Result<Vec<(Vec<VarId>, Assignment)>> {
    let mut cands: Vec<VarId> = candidates.to_vec();
    cands.sort();
    cands.dedup();
    sort_by_name(m, &mut cands);
    let mut out: Vec<(Vec<VarId>, Assignment)> = Vec::new();
    for_each_subset::<()>(cands.len(), |idx| {
        if idx.is_empty() {
            return Ok(None);
        }
        if mode == CauseMode::Actual && idx.len() > 1 {
            return Ok(None);
        }
        let sub_vars: Vec<VarId> = idx.iter().map(|&i| cands[i]).collect();
        for_each_value_tuple::<()>(m, &sub_vars, |vals| {
            let x = Assignment::from_pairs(sub_vars.iter().copied().zip(vals.iter().copied()));
            let q = CauseQuery::new(m, &x, u, phi.clone())?;
            let hit = match mode {
                CauseMode::Weak => is_weak_cause(&q, opts)?,
                CauseMode::Actual => is_actual_cause(&q, opts)?,
            };
            if hit {
                out.push((sub_vars.clone(), x));
            }
            Ok(None)
        })?;
        Ok(None)
    })?;
    Ok(out)
}
