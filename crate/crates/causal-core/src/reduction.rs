//! Removal of irrelevant variables from weak-cause instances.
//!
//! Two reductions of the candidate cause itself:
//!
//! - [`strip_nonancestors`] drops cause members with no directed path to any
//!   event variable;
//! - [`strip_blocked`] drops members whose every path to the event is blocked
//!   by another cause member.
//!
//! Both preserve the weak-cause decision provided the dropped member takes
//! its candidate value under the context; members failing that guard are kept
//! and flagged rather than silently dropped.
//!
//! And a reduction of the model: every endogenous variable is classified as
//!
//! - ClassI — a cause member lying on no path from another cause member to an
//!   event variable;
//! - ClassII — a variable on such a path;
//! - ClassIII — otherwise relevant: an event variable, or a parent of a
//!   ClassII variable;
//! - Irrelevant — everything else.
//!
//! The reduced model keeps ClassII mechanisms verbatim and rewires ClassI and
//! ClassIII variables to depend only on their exogenous ancestors, assigning
//! each the value it takes naturally. Weak-cause questions for any subset of
//! the cause agree between the original and the reduced model.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::graph::{causal_graph, reaches_any, strictly_reachable_from, CausalGraph, OpCounters};
use crate::iterate::{for_each_value_tuple, sort_by_name};
use crate::model::{
    Assignment, CausalModel, Mechanism, MechanismBody, Value, VarId, VarKind, Variable,
};

/// Default ceiling on materialized exogenous-ancestor tables in the reduced
/// model; above it mechanisms stay deferred against the original model.
pub const DEFAULT_TABLE_BUDGET: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RelevanceClass {
    ClassI,
    ClassII,
    ClassIII,
    Irrelevant,
}

/// Per-endogenous-variable relevance assignment.
#[derive(Debug, Clone)]
pub struct RelevanceClassification {
    classes: Vec<Option<RelevanceClass>>,
}

impl RelevanceClassification {
    pub fn class(&self, v: VarId) -> RelevanceClass {
        self.classes[v.index()].expect("endogenous variable")
    }

    pub fn is_relevant(&self, v: VarId) -> bool {
        matches!(
            self.classes[v.index()],
            Some(RelevanceClass::ClassI | RelevanceClass::ClassII | RelevanceClass::ClassIII)
        )
    }

    /// Relevant endogenous variables in id order.
    pub fn relevant(&self) -> Vec<VarId> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                matches!(
                    c,
                    Some(RelevanceClass::ClassI | RelevanceClass::ClassII | RelevanceClass::ClassIII)
                )
            })
            .map(|(i, _)| VarId(i as u32))
            .collect()
    }
}

/// Result of a cause-stripping pass.
#[derive(Debug, Clone)]
pub struct StripOutcome {
    /// Remaining cause variables, sorted by name.
    pub kept: Vec<VarId>,
    /// The restriction of `x` to `kept`.
    pub value: Assignment,
    /// Members that were droppable by the graph criterion but kept because
    /// their actual value under `u` differs from their candidate value.
    pub flagged: Vec<VarId>,
}

fn phi_vars(phi: &Event) -> Vec<VarId> {
    phi.vars().into_iter().collect()
}

/// Keeps the cause members that are ancestors (reflexively) of some event
/// variable. Linear in the size of `G(M)`.
pub fn strip_nonancestors(
    m: &CausalModel,
    x: &Assignment,
    phi: &Event,
    u: &Assignment,
) -> Result<StripOutcome> {
    strip_nonancestors_counted(m, x, phi, u, &mut OpCounters::default())
}

pub fn strip_nonancestors_counted(
    m: &CausalModel,
    x: &Assignment,
    phi: &Event,
    u: &Assignment,
    counters: &mut OpCounters,
) -> Result<StripOutcome> {
    let anc = reaches_any(m, phi_vars(phi), counters);
    finish_strip(m, x, u, |v| anc[v.index()])
}

/// Keeps the cause members that have a directed path to some event variable
/// avoiding every other cause member. Linear in the size of `G(M)`.
pub fn strip_blocked(
    m: &CausalModel,
    x: &Assignment,
    phi: &Event,
    u: &Assignment,
) -> Result<StripOutcome> {
    strip_blocked_counted(m, x, phi, u, &mut OpCounters::default())
}

pub fn strip_blocked_counted(
    m: &CausalModel,
    x: &Assignment,
    phi: &Event,
    u: &Assignment,
    counters: &mut OpCounters,
) -> Result<StripOutcome> {
    // clean[v]: v ∉ X and v reaches an event variable through non-X nodes.
    let mut clean = vec![false; m.var_count()];
    let mut queue: Vec<VarId> = Vec::new();
    let targets = phi_vars(phi);
    let mut is_phi = vec![false; m.var_count()];
    for &t in &targets {
        is_phi[t.index()] = true;
        if !x.binds(t) && !clean[t.index()] {
            clean[t.index()] = true;
            queue.push(t);
        }
    }
    while let Some(v) = queue.pop() {
        counters.node();
        for &p in m.parents(v) {
            counters.edge();
            if !x.binds(p) && !clean[p.index()] && m.kind(p) == VarKind::Endogenous {
                clean[p.index()] = true;
                queue.push(p);
            }
        }
    }
    finish_strip(m, x, u, |v| {
        is_phi[v.index()]
            || m.children(v).iter().any(|c| clean[c.index()])
    })
}

fn finish_strip(
    m: &CausalModel,
    x: &Assignment,
    u: &Assignment,
    keep: impl Fn(VarId) -> bool,
) -> Result<StripOutcome> {
    let actual = m.evaluate(u)?;
    let mut kept = Vec::new();
    let mut flagged = Vec::new();
    for (var, val) in x.iter() {
        if keep(var) {
            kept.push(var);
        } else if actual.get(var) != Some(val) {
            // dropping is only sound when the member takes its candidate
            // value under u; keep it and report the violation
            kept.push(var);
            flagged.push(var);
        }
    }
    sort_by_name(m, &mut kept);
    sort_by_name(m, &mut flagged);
    let value = x.restrict(kept.iter().copied());
    Ok(StripOutcome {
        kept,
        value,
        flagged,
    })
}

/// Classifies every endogenous variable per the relevance conditions.
pub fn classify_relevance(
    m: &CausalModel,
    cause_vars: &[VarId],
    phi: &Event,
) -> RelevanceClassification {
    classify_relevance_counted(m, cause_vars, phi, &mut OpCounters::default())
}

pub fn classify_relevance_counted(
    m: &CausalModel,
    cause_vars: &[VarId],
    phi: &Event,
    counters: &mut OpCounters,
) -> RelevanceClassification {
    let targets = phi_vars(phi);
    let reaches_phi = reaches_any(m, targets.iter().copied(), counters);
    // reachable from a cause member by a path with at least one edge; in a
    // DAG that source is automatically a *different* member
    let from_x = strictly_reachable_from(m, cause_vars.iter().copied(), counters);
    let mut is_phi = vec![false; m.var_count()];
    for &t in &targets {
        is_phi[t.index()] = true;
    }
    let in_x: BTreeSet<VarId> = cause_vars.iter().copied().collect();

    let mut classes: Vec<Option<RelevanceClass>> = vec![None; m.var_count()];
    for v in m.endogenous_ids() {
        let i = v.index();
        let on_path = from_x[i] && reaches_phi[i];
        classes[i] = Some(if on_path {
            RelevanceClass::ClassII
        } else if in_x.contains(&v) {
            RelevanceClass::ClassI
        } else {
            RelevanceClass::Irrelevant
        });
    }
    // ClassIII: not I/II, and either in the event or a parent of a ClassII
    // variable.
    for v in m.endogenous_ids() {
        let i = v.index();
        if classes[i] != Some(RelevanceClass::Irrelevant) {
            continue;
        }
        counters.node();
        let mut third = is_phi[i];
        if !third {
            for &c in m.children(v) {
                counters.edge();
                if classes[c.index()] == Some(RelevanceClass::ClassII) {
                    third = true;
                    break;
                }
            }
        }
        if third {
            classes[i] = Some(RelevanceClass::ClassIII);
        }
    }
    RelevanceClassification { classes }
}

/// `G^φ_{X=x}(M)`: the restriction of `G(M)` to the relevant endogenous
/// variables plus the exogenous variables.
pub fn relevant_graph(m: &CausalModel, cause_vars: &[VarId], phi: &Event) -> CausalGraph {
    relevant_graph_counted(m, cause_vars, phi, &mut OpCounters::default())
}

pub fn relevant_graph_counted(
    m: &CausalModel,
    cause_vars: &[VarId],
    phi: &Event,
    counters: &mut OpCounters,
) -> CausalGraph {
    let classification = classify_relevance_counted(m, cause_vars, phi, counters);
    let g = causal_graph(m);
    g.restrict(|v| m.kind(v) == VarKind::Exogenous || classification.is_relevant(v))
}

/// A reduced model together with the classification that produced it.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub model: CausalModel,
    pub classification: RelevanceClassification,
    /// Original ids of the variables retained, in the reduced model's arena
    /// order.
    pub retained: Vec<VarId>,
}

impl ReducedModel {
    /// Maps an original variable id into the reduced model.
    pub fn map(&self, original: VarId) -> Option<VarId> {
        self.retained
            .iter()
            .position(|&v| v == original)
            .map(|i| VarId(i as u32))
    }

    /// Maps an assignment of the original model into the reduced model;
    /// fails if it binds a dropped variable.
    pub fn map_assignment(&self, a: &Assignment, original: &CausalModel) -> Result<Assignment> {
        let mut out = Assignment::new();
        for (var, val) in a.iter() {
            let nv = self
                .map(var)
                .ok_or_else(|| Error::UnknownVariable(original.name(var).to_string()))?;
            out.bind(nv, val);
        }
        Ok(out)
    }

    pub fn map_event(&self, phi: &Event, original: &CausalModel) -> Result<Event> {
        Ok(match phi {
            Event::Prim(v, val) => Event::Prim(
                self.map(*v)
                    .ok_or_else(|| Error::UnknownVariable(original.name(*v).to_string()))?,
                *val,
            ),
            Event::Not(e) => Event::not(self.map_event(e, original)?),
            Event::And(a, b) => Event::and(
                self.map_event(a, original)?,
                self.map_event(b, original)?,
            ),
        })
    }
}

/// Builds the reduced model `M^φ_{X=x}`.
///
/// ClassI and ClassIII variables get a mechanism over their exogenous
/// ancestors assigning their natural value; it is tabulated when the
/// ancestor domain product fits in `table_budget` and deferred otherwise.
pub fn reduce_model(
    m: &CausalModel,
    cause_vars: &[VarId],
    phi: &Event,
    table_budget: u64,
) -> Result<ReducedModel> {
    let classification = classify_relevance(m, cause_vars, phi);
    let retained_endo = classification.relevant();

    let mut retained: Vec<VarId> = m.exogenous_ids().collect();
    retained.extend(retained_endo.iter().copied());
    let mut new_id: Vec<Option<VarId>> = vec![None; m.var_count()];
    for (i, &v) in retained.iter().enumerate() {
        new_id[v.index()] = Some(VarId(i as u32));
    }

    let vars: Vec<Variable> = retained.iter().map(|&v| m.variable(v).clone()).collect();
    let mut mechanisms: Vec<Option<Mechanism>> = vec![None; retained.len()];
    let mut origin_arc: Option<Arc<CausalModel>> = None;

    for &v in &retained_endo {
        let mech = match classification.class(v) {
            RelevanceClass::ClassII => {
                let old = m.mechanism(v).expect("endogenous");
                let parents = old
                    .parents
                    .iter()
                    .map(|p| {
                        new_id[p.index()].ok_or_else(|| Error::UnknownVariable(format!(
                            "parent `{}` of `{}` dropped by reduction",
                            m.name(*p),
                            m.name(v)
                        )))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Mechanism {
                    parents,
                    body: old.body.clone(),
                }
            }
            RelevanceClass::ClassI | RelevanceClass::ClassIII => {
                natural_mechanism(m, v, &new_id, table_budget, &mut origin_arc)?
            }
            RelevanceClass::Irrelevant => unreachable!("retained variables are relevant"),
        };
        mechanisms[new_id[v.index()].unwrap().index()] = Some(mech);
    }

    let model = CausalModel::assemble(vars, mechanisms)?;
    Ok(ReducedModel {
        model,
        classification,
        retained,
    })
}

/// The natural-value mechanism over a variable's exogenous ancestors.
fn natural_mechanism(
    m: &CausalModel,
    v: VarId,
    new_id: &[Option<VarId>],
    table_budget: u64,
    origin_arc: &mut Option<Arc<CausalModel>>,
) -> Result<Mechanism> {
    // exogenous ancestors of v in G(M)
    let mut counters = OpCounters::default();
    let anc = reaches_any(m, [v], &mut counters);
    let mut exo_anc: Vec<VarId> = m.exogenous_ids().filter(|a| anc[a.index()]).collect();
    sort_by_name(m, &mut exo_anc);

    let mut entries: u128 = 1;
    for &a in &exo_anc {
        entries = entries.saturating_mul(m.domain(a).len() as u128);
    }
    let parents: Vec<VarId> = exo_anc
        .iter()
        .map(|a| new_id[a.index()].expect("exogenous retained"))
        .collect();

    if entries <= table_budget as u128 {
        let mut rows: Vec<Value> = Vec::with_capacity(entries as usize);
        for_each_value_tuple::<()>(m, &exo_anc, |vals| {
            let mut u = Assignment::new();
            for (a, val) in exo_anc.iter().zip(vals) {
                u.bind(*a, *val);
            }
            // any extension agrees on v's value
            for a in m.exogenous_ids() {
                if !u.binds(a) {
                    u.bind(a, Value(0));
                }
            }
            let out = m.eval_intervened(&Assignment::new(), &u, &[v])?;
            rows.push(out.get(v).expect("evaluated"));
            Ok(None)
        })?;
        Ok(Mechanism::table(parents, rows))
    } else {
        let origin = origin_arc
            .get_or_insert_with(|| Arc::new(m.clone()))
            .clone();
        Ok(Mechanism {
            parents,
            body: MechanismBody::Natural {
                origin,
                target: v,
                origin_parents: exo_anc,
            },
        })
    }
}
