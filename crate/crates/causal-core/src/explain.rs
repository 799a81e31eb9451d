//! Explanations, partial explanations, and explanatory power.
//!
//! Relative to a set of contexts `C` (all of which satisfy the event),
//! `X = x` is an explanation of `φ` iff
//!
//! - EX1: `φ(u)` for each `u ∈ C`;
//! - EX2: `X = x` is a weak cause of `φ` under every `u ∈ C` with
//!   `X(u) = x`;
//! - EX3: for every nonempty `X' ⊂ X` some `u ∈ C` has `X'(u) = x|X'` and
//!   `X' = x|X'` not a weak cause under `u`;
//! - EX4: `X(u) = x` for some `u ∈ C` and `X(u') ≠ x` for some `u' ∈ C`.
//!
//! The largest subset of `C` relative to which `X = x` is an explanation,
//! when it exists, consists of the contexts where `X(u) ≠ x` plus those
//! where `X = x` holds and is a weak cause. Explanatory power divides the
//! probability mass of that subset's `X(u) = x` part by the mass of all
//! `X(u) = x` contexts; probabilities are exact rationals throughout.
//!
//! All weak-cause subqueries go through a [`WeakCauseBackend`], so the same
//! checks run against the oracle or any of the tractable algorithms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::event::Event;
use crate::iterate::{for_each_subset, sort_by_name};
use crate::model::{Assignment, CausalModel, VarId};
use crate::oracle::{is_weak_cause, BruteOptions, CauseQuery};

/// A pluggable weak-cause decision procedure.
pub trait WeakCauseBackend {
    fn name(&self) -> &'static str;

    /// Decides whether `cause` is a weak cause of `phi` under `u`.
    fn decide(
        &self,
        m: &CausalModel,
        cause: &Assignment,
        phi: &Event,
        u: &Assignment,
    ) -> Result<bool>;
}

/// The brute-force oracle as a backend.
#[derive(Debug, Clone, Default)]
pub struct BruteBackend {
    pub opts: BruteOptions,
}

impl WeakCauseBackend for BruteBackend {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn decide(
        &self,
        m: &CausalModel,
        cause: &Assignment,
        phi: &Event,
        u: &Assignment,
    ) -> Result<bool> {
        let q = CauseQuery::new(m, cause, u, phi.clone())?;
        is_weak_cause(&q, &self.opts)
    }
}

/// A finite set of contexts with optional exact probabilities.
#[derive(Debug, Clone)]
pub struct ContextSet {
    contexts: Vec<Assignment>,
    probabilities: Option<Vec<BigRational>>,
}

impl ContextSet {
    pub fn new(contexts: Vec<Assignment>, probabilities: Option<Vec<BigRational>>) -> Result<Self> {
        if contexts.is_empty() {
            return Err(Error::EmptyContextSet);
        }
        for (i, a) in contexts.iter().enumerate() {
            for b in contexts.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::ExplainPrecondition(
                        "contexts must be pairwise distinct".into(),
                    ));
                }
            }
        }
        if let Some(ps) = &probabilities {
            if ps.len() != contexts.len() {
                return Err(Error::ExplainPrecondition(
                    "one probability per context required".into(),
                ));
            }
            if ps.iter().any(|p| p < &BigRational::zero()) {
                return Err(Error::ExplainPrecondition(
                    "probabilities must be non-negative".into(),
                ));
            }
            let total: BigRational = ps.iter().sum();
            if total != BigRational::one() {
                return Err(Error::ExplainPrecondition(format!(
                    "probabilities must sum to 1, got {total}"
                )));
            }
        }
        Ok(ContextSet {
            contexts,
            probabilities,
        })
    }

    pub fn uniform(contexts: Vec<Assignment>) -> Result<Self> {
        let n = contexts.len();
        if n == 0 {
            return Err(Error::EmptyContextSet);
        }
        let p = BigRational::new(BigInt::from(1), BigInt::from(n));
        ContextSet::new(contexts, Some(vec![p; n]))
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn contexts(&self) -> &[Assignment] {
        &self.contexts
    }

    pub fn probabilities(&self) -> Option<&[BigRational]> {
        self.probabilities.as_deref()
    }

    /// Probability of the `i`-th context; uniform when none were given.
    pub fn probability(&self, i: usize) -> BigRational {
        match &self.probabilities {
            Some(ps) => ps[i].clone(),
            None => BigRational::new(BigInt::from(1), BigInt::from(self.contexts.len())),
        }
    }

    fn subset(&self, indices: &[usize]) -> Result<ContextSet> {
        ContextSet::new(
            indices.iter().map(|&i| self.contexts[i].clone()).collect(),
            None,
        )
    }
}

/// Which EX condition failed, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailedCondition {
    /// The event fails under this context.
    Ex1 { context_index: usize },
    /// `X = x` holds but is not a weak cause under this context.
    Ex2 { context_index: usize },
    /// This proper subset is a weak cause wherever it matches.
    Ex3 { subset: Vec<VarId> },
    /// `X(u) = x` never holds, or never fails, across the set.
    Ex4,
}

#[derive(Debug, Clone)]
pub struct ExplanationVerdict {
    pub is_explanation: bool,
    pub failed: Option<FailedCondition>,
}

fn matches_cause(m: &CausalModel, cause: &Assignment, u: &Assignment) -> Result<bool> {
    let actual = m.evaluate(u)?;
    Ok(cause.iter().all(|(var, val)| actual.get(var) == Some(val)))
}

/// Checks EX1–EX4 literally, reporting the first failed condition.
pub fn is_explanation(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    c: &ContextSet,
    backend: &dyn WeakCauseBackend,
) -> Result<ExplanationVerdict> {
    if cause.is_empty() {
        return Err(Error::EmptyCauseSet);
    }
    // EX1
    for (i, u) in c.contexts().iter().enumerate() {
        if !m.holds(u, phi)? {
            return Ok(ExplanationVerdict {
                is_explanation: false,
                failed: Some(FailedCondition::Ex1 { context_index: i }),
            });
        }
    }
    // EX2
    for (i, u) in c.contexts().iter().enumerate() {
        if matches_cause(m, cause, u)? && !backend.decide(m, cause, phi, u)? {
            return Ok(ExplanationVerdict {
                is_explanation: false,
                failed: Some(FailedCondition::Ex2 { context_index: i }),
            });
        }
    }
    // EX3: nonempty proper subsets, by size then lexicographically
    let mut cause_vars: Vec<VarId> = cause.vars().collect();
    sort_by_name(m, &mut cause_vars);
    let n = cause_vars.len();
    let bad_subset = for_each_subset(n, |idx| {
        if idx.is_empty() || idx.len() == n {
            return Ok(None);
        }
        let sub_vars: Vec<VarId> = idx.iter().map(|&i| cause_vars[i]).collect();
        let sub = cause.restrict(sub_vars.iter().copied());
        for u in c.contexts() {
            if matches_cause(m, &sub, u)? && !backend.decide(m, &sub, phi, u)? {
                // this subset is properly rejected somewhere
                return Ok(None);
            }
        }
        Ok(Some(sub_vars))
    })?;
    if let Some(subset) = bad_subset {
        return Ok(ExplanationVerdict {
            is_explanation: false,
            failed: Some(FailedCondition::Ex3 { subset }),
        });
    }
    // EX4
    let mut holds_somewhere = false;
    let mut fails_somewhere = false;
    for u in c.contexts() {
        if matches_cause(m, cause, u)? {
            holds_somewhere = true;
        } else {
            fails_somewhere = true;
        }
    }
    if !(holds_somewhere && fails_somewhere) {
        return Ok(ExplanationVerdict {
            is_explanation: false,
            failed: Some(FailedCondition::Ex4),
        });
    }
    Ok(ExplanationVerdict {
        is_explanation: true,
        failed: None,
    })
}

/// Indices of the candidate largest explaining subset
/// `{u : X(u) ≠ x} ∪ {u : X(u) = x and X = x is a weak cause under u}`.
fn candidate_subset_indices(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    c: &ContextSet,
    backend: &dyn WeakCauseBackend,
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, u) in c.contexts().iter().enumerate() {
        if !matches_cause(m, cause, u)? || backend.decide(m, cause, phi, u)? {
            out.push(i);
        }
    }
    Ok(out)
}

/// `C^φ_{X=x}` as indices into `c`, or `None` when `X = x` is an explanation
/// relative to no subset of `c`. Requires `φ(u)` for every `u ∈ c`.
pub fn largest_explaining_indices(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    c: &ContextSet,
    backend: &dyn WeakCauseBackend,
) -> Result<Option<Vec<usize>>> {
    for u in c.contexts() {
        if !m.holds(u, phi)? {
            return Err(Error::ExplainPrecondition(format!(
                "event fails under context {}",
                m.show(u)
            )));
        }
    }
    let indices = candidate_subset_indices(m, cause, phi, c, backend)?;
    if indices.is_empty() {
        return Ok(None);
    }
    let sub = c.subset(&indices)?;
    let verdict = is_explanation(m, cause, phi, &sub, backend)?;
    Ok(verdict.is_explanation.then_some(indices))
}

/// `C^φ_{X=x}` as a context set.
pub fn largest_explaining_subset(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    c: &ContextSet,
    backend: &dyn WeakCauseBackend,
) -> Result<Option<ContextSet>> {
    Ok(match largest_explaining_indices(m, cause, phi, c, backend)? {
        Some(idx) => Some(c.subset(&idx)?),
        None => None,
    })
}

/// Explanatory power together with the subset that realizes it.
#[derive(Debug, Clone)]
pub struct PowerOutcome {
    pub power: BigRational,
    pub subset_indices: Vec<usize>,
}

/// `P(C^φ_{X=x} | X = x)`: the mass of the largest explaining subset's
/// `X(u) = x` part over the mass of all `X(u) = x` contexts.
pub fn explanatory_power(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    c: &ContextSet,
    backend: &dyn WeakCauseBackend,
) -> Result<PowerOutcome> {
    let indices = largest_explaining_indices(m, cause, phi, c, backend)?
        .ok_or(Error::UndefinedSubset)?;
    let mut denominator = BigRational::zero();
    for (i, u) in c.contexts().iter().enumerate() {
        if matches_cause(m, cause, u)? {
            denominator += c.probability(i);
        }
    }
    if denominator.is_zero() {
        return Err(Error::UndefinedDenominator);
    }
    let mut numerator = BigRational::zero();
    for &i in &indices {
        // the summation carries the side condition X(u) = x
        if matches_cause(m, cause, &c.contexts()[i])? {
            numerator += c.probability(i);
        }
    }
    Ok(PowerOutcome {
        power: numerator / denominator,
        subset_indices: indices,
    })
}

/// `X = x` is an α-partial explanation iff the largest explaining subset is
/// defined and the power reaches `alpha`.
pub fn is_alpha_partial(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    c: &ContextSet,
    alpha: &BigRational,
    backend: &dyn WeakCauseBackend,
) -> Result<bool> {
    if largest_explaining_indices(m, cause, phi, c, backend)?.is_none() {
        return Ok(false);
    }
    let outcome = explanatory_power(m, cause, phi, c, backend)?;
    Ok(outcome.power >= *alpha)
}

/// Partial explanation: α-partial for some α > 0, i.e. positive power.
pub fn is_partial(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    c: &ContextSet,
    backend: &dyn WeakCauseBackend,
) -> Result<bool> {
    if largest_explaining_indices(m, cause, phi, c, backend)?.is_none() {
        return Ok(false);
    }
    let outcome = explanatory_power(m, cause, phi, c, backend)?;
    Ok(outcome.power > BigRational::zero())
}
