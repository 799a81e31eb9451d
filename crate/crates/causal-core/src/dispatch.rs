//! Algorithm selection and the end-to-end query pipeline.
//!
//! The automatic route is: AC1 gate → strip the cause (non-ancestors, then
//! blocked members) → reduce the model → try the tree algorithm (singleton
//! cause, primitive event), then the layered algorithm (primitive event),
//! then the trivial decomposition, and finally the brute-force oracle on the
//! reduced instance. Every route decides the same question, so
//! auto-selection never changes the answer; the report records which
//! algorithm actually rendered the decision.

use serde_json::{json, Value as Json};

use crate::decomp::{is_weak_cause_decomposed, trivial_decomposition, Decomposition, TripleRelation};
use crate::error::{Error, Result};
use crate::event::Event;
use crate::explain::WeakCauseBackend;
use crate::model::{Assignment, CausalModel, VarId};
use crate::oracle::{
    ac1_holds, check_witness, is_weak_cause_bruteforce, BruteOptions, CauseQuery, Witness,
};
use crate::reduction::{reduce_model, strip_blocked, strip_nonancestors, ReducedModel,
    DEFAULT_TABLE_BUDGET};
use crate::tree::{build_tree_relations, decide_on_tree, detect_tree};
use crate::layered::{build_layered_relations, decide_on_layering, detect_layered};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Auto,
    Brute,
    Tree,
    Layered,
    Decomp,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Algorithm::Auto),
            "brute" => Ok(Algorithm::Brute),
            "tree" => Ok(Algorithm::Tree),
            "layered" => Ok(Algorithm::Layered),
            "decomp" => Ok(Algorithm::Decomp),
            other => Err(Error::NotApplicable {
                algorithm: other.to_string(),
                reason: "expected auto|brute|tree|layered|decomp".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DecisionOptions {
    pub algorithm: Option<Algorithm>,
    pub decomposition: Option<Decomposition>,
    pub brute: BruteOptions,
    /// Witnesses come from the oracle search; asking for one routes the
    /// query through it.
    pub want_witness: bool,
    pub want_trace: bool,
    /// Skip the specialized algorithms when the detected in-degree (tree)
    /// or layer width (layered) exceeds this.
    pub width_bound: Option<usize>,
    /// Skip the specialized algorithms when some relevant domain exceeds
    /// this.
    pub domain_bound: Option<usize>,
}

/// What the cause-stripping and model reduction did to the instance.
#[derive(Debug, Clone, Default)]
pub struct ReductionSummary {
    pub stripped_nonancestors: Vec<String>,
    pub stripped_blocked: Vec<String>,
    pub strip_flagged: Vec<String>,
    pub relevant: Vec<String>,
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub holds: bool,
    pub algorithm_used: String,
    pub witness: Option<Witness>,
    pub reduction: Option<ReductionSummary>,
    pub trace: Option<Json>,
}

impl Decision {
    fn plain(holds: bool, algorithm: &str) -> Decision {
        Decision {
            holds,
            algorithm_used: algorithm.to_string(),
            witness: None,
            reduction: None,
            trace: None,
        }
    }
}

/// Decides whether `cause` is a weak cause of `phi` under `u`.
pub fn decide_weak_cause(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    u: &Assignment,
    opts: &DecisionOptions,
) -> Result<Decision> {
    let q = CauseQuery::new(m, cause, u, phi.clone())?;
    match opts.algorithm.unwrap_or(Algorithm::Auto) {
        Algorithm::Brute => {
            let out = is_weak_cause_bruteforce(&q, &opts.brute)?;
            Ok(Decision {
                holds: out.is_cause,
                algorithm_used: "brute".into(),
                witness: out.witness,
                reduction: None,
                trace: None,
            })
        }
        Algorithm::Tree => {
            let (y_var, y_val) = phi.as_primitive().ok_or_else(|| Error::NotApplicable {
                algorithm: "tree".into(),
                reason: "the tree algorithm handles a single primitive event".into(),
            })?;
            if q.cause_vars.len() != 1 {
                return Err(Error::NotApplicable {
                    algorithm: "tree".into(),
                    reason: "the tree algorithm handles singleton causes".into(),
                });
            }
            let staged = Staged::prepare(m, &q)?;
            staged
                .try_tree(y_var, y_val, opts)?
                .ok_or_else(|| Error::NotApplicable {
                    algorithm: "tree".into(),
                    reason: format!(
                        "the relevant graph is not a directed tree rooted at {}",
                        m.name(y_var)
                    ),
                })
        }
        Algorithm::Layered => {
            let (y_var, y_val) = phi.as_primitive().ok_or_else(|| Error::NotApplicable {
                algorithm: "layered".into(),
                reason: "the layered algorithm handles a single primitive event".into(),
            })?;
            let staged = Staged::prepare(m, &q)?;
            staged
                .try_layered(y_var, y_val, opts)?
                .ok_or_else(|| Error::NotApplicable {
                    algorithm: "layered".into(),
                    reason: format!(
                        "the relevant graph is not layered with respect to the cause and {}",
                        m.name(y_var)
                    ),
                })
        }
        Algorithm::Decomp => {
            let dec = opts
                .decomposition
                .as_ref()
                .ok_or_else(|| Error::NotApplicable {
                    algorithm: "decomp".into(),
                    reason: "a decomposition must be supplied".into(),
                })?;
            let holds = is_weak_cause_decomposed(m, cause, phi, u, dec, &opts.brute)?;
            Ok(Decision::plain(holds, "decomp"))
        }
        Algorithm::Auto => decide_auto(m, &q, opts),
    }
}

/// Actual cause: a singleton weak cause.
pub fn decide_actual_cause(
    m: &CausalModel,
    cause: &Assignment,
    phi: &Event,
    u: &Assignment,
    opts: &DecisionOptions,
) -> Result<Decision> {
    let q = CauseQuery::new(m, cause, u, phi.clone())?;
    if q.cause_vars.len() != 1 {
        return Ok(Decision::plain(false, "minimality"));
    }
    decide_weak_cause(m, cause, phi, u, opts)
}

/// The stripped and reduced instance shared by the specialized routes.
struct Staged<'m> {
    original: &'m CausalModel,
    original_query: &'m CauseQuery<'m>,
    reduced: ReducedModel,
    cause_r: Assignment,
    u_r: Assignment,
    summary: ReductionSummary,
    /// Cause variables surviving the strips, original ids, sorted.
    kept: Vec<VarId>,
}

impl<'m> Staged<'m> {
    fn prepare(m: &'m CausalModel, q: &'m CauseQuery<'m>) -> Result<Staged<'m>> {
        let mut summary = ReductionSummary::default();
        let s1 = strip_nonancestors(m, &q.cause_value, &q.event, &q.context)?;
        for (var, _) in q.cause_value.iter() {
            if !s1.kept.contains(&var) {
                summary
                    .stripped_nonancestors
                    .push(m.name(var).to_string());
            }
        }
        let s2 = strip_blocked(m, &s1.value, &q.event, &q.context)?;
        for &var in &s1.kept {
            if !s2.kept.contains(&var) {
                summary.stripped_blocked.push(m.name(var).to_string());
            }
        }
        summary.strip_flagged = s1
            .flagged
            .iter()
            .chain(&s2.flagged)
            .map(|&v| m.name(v).to_string())
            .collect();

        let reduced = reduce_model(m, &s2.kept, &q.event, DEFAULT_TABLE_BUDGET)?;
        for v in m.endogenous_ids() {
            if reduced.classification.is_relevant(v) {
                summary.relevant.push(m.name(v).to_string());
            } else {
                summary.dropped.push(m.name(v).to_string());
            }
        }
        let cause_r = reduced.map_assignment(&s2.value, m)?;
        let u_r = reduced.map_assignment(&q.context, m)?;
        Ok(Staged {
            original: m,
            original_query: q,
            reduced,
            cause_r,
            u_r,
            summary,
            kept: s2.kept,
        })
    }

    fn is_empty_cause(&self) -> bool {
        self.kept.is_empty()
    }

    /// The domain-bound profile check over the reduced model.
    fn domains_within(&self, bound: Option<usize>) -> bool {
        match bound {
            None => true,
            Some(k) => self
                .reduced
                .model
                .endogenous_ids()
                .all(|v| self.reduced.model.domain(v).len() <= k),
        }
    }

    fn try_tree(&self, y_var: VarId, y_val: crate::model::Value, opts: &DecisionOptions) -> Result<Option<Decision>> {
        if self.kept.len() != 1 {
            return Ok(None);
        }
        let rm = &self.reduced.model;
        let x_r = self.reduced.map(self.kept[0]).expect("cause is relevant");
        let y_r = match self.reduced.map(y_var) {
            Some(v) => v,
            None => return Ok(None),
        };
        let det = match detect_tree(rm, x_r, y_r) {
            Some(d) => d,
            None => return Ok(None),
        };
        if opts.width_bound.is_some_and(|b| det.max_in_degree > b)
            || !self.domains_within(opts.domain_bound)
        {
            return Ok(None);
        }
        let x_val = self.cause_r.get(x_r).expect("cause bound");
        let holds = decide_on_tree(rm, &det.path, x_val, y_val, &self.u_r)?;
        let trace = if opts.want_trace {
            let (rel, _) = build_tree_relations(rm, &det.path, &self.u_r, y_val)?;
            Some(tree_trace(rm, &det.path.nodes, &rel.levels))
        } else {
            None
        };
        Ok(Some(Decision {
            holds,
            algorithm_used: "tree".into(),
            witness: None,
            reduction: Some(self.summary.clone()),
            trace,
        }))
    }

    fn try_layered(&self, y_var: VarId, y_val: crate::model::Value, opts: &DecisionOptions) -> Result<Option<Decision>> {
        if self.kept.is_empty() {
            return Ok(None);
        }
        let rm = &self.reduced.model;
        let y_r = match self.reduced.map(y_var) {
            Some(v) => v,
            None => return Ok(None),
        };
        let cause_vars_r: Vec<VarId> = self.cause_r.vars().collect();
        let det = match detect_layered(rm, &cause_vars_r, y_r) {
            Some(d) => d,
            None => return Ok(None),
        };
        if opts.width_bound.is_some_and(|b| det.width > b)
            || !self.domains_within(opts.domain_bound)
        {
            return Ok(None);
        }
        let holds =
            decide_on_layering(rm, &det.layering, &self.cause_r, y_r, y_val, &self.u_r, &opts.brute)?;
        let trace = if opts.want_trace {
            let (rel, _) =
                build_layered_relations(rm, &det.layering, y_val, &self.u_r, &opts.brute)?;
            Some(triple_trace(rm, &rel))
        } else {
            None
        };
        Ok(Some(Decision {
            holds,
            algorithm_used: "layered".into(),
            witness: None,
            reduction: Some(self.summary.clone()),
            trace,
        }))
    }

    fn try_trivial_decomp(&self, opts: &DecisionOptions) -> Result<Option<Decision>> {
        if self.kept.is_empty() {
            return Ok(None);
        }
        let rm = &self.reduced.model;
        let cause_vars_r: Vec<VarId> = self.cause_r.vars().collect();
        let phi_r = self
            .reduced
            .map_event(&self.original_query.event, self.original)?;
        let dec = match trivial_decomposition(&self.reduced, &cause_vars_r, &phi_r) {
            Some(d) => d,
            None => return Ok(None),
        };
        if dec.max_block() > opts.brute.cap {
            return Ok(None);
        }
        let holds = is_weak_cause_decomposed(rm, &self.cause_r, &phi_r, &self.u_r, &dec, &opts.brute)?;
        Ok(Some(Decision {
            holds,
            algorithm_used: "decomp".into(),
            witness: None,
            reduction: Some(self.summary.clone()),
            trace: None,
        }))
    }

    fn brute_on_reduced(&self, opts: &DecisionOptions) -> Result<Decision> {
        let rm = &self.reduced.model;
        let phi_r = self
            .reduced
            .map_event(&self.original_query.event, self.original)?;
        let q_r = CauseQuery::new(rm, &self.cause_r, &self.u_r, phi_r)?;
        let out = is_weak_cause_bruteforce(&q_r, &opts.brute)?;
        let witness = match (opts.want_witness, out.witness) {
            (true, Some(w)) => Some(self.map_witness_back(w, opts)?),
            _ => None,
        };
        Ok(Decision {
            holds: out.is_cause,
            algorithm_used: "brute".into(),
            witness,
            reduction: Some(self.summary.clone()),
            trace: None,
        })
    }

    /// Pulls a witness found in the reduced model back to the original and
    /// re-validates it there; falls back to a direct search if it does not
    /// carry over.
    fn map_witness_back(&self, w: Witness, opts: &DecisionOptions) -> Result<Witness> {
        let back = |a: &Assignment| -> Assignment {
            Assignment::from_pairs(
                a.iter()
                    .map(|(var, val)| (self.reduced.retained[var.index()], val)),
            )
        };
        let mapped = Witness {
            contingency_vars: w
                .contingency_vars
                .iter()
                .map(|v| self.reduced.retained[v.index()])
                .collect(),
            alt_cause: back(&w.alt_cause),
            contingency: back(&w.contingency),
        };
        // the stripped members fall outside the reduced search; extend the
        // alternative cause with their candidate values
        let mut alt = mapped.alt_cause.clone();
        for (var, val) in self.original_query.cause_value.iter() {
            if !alt.binds(var) {
                alt.bind(var, val);
            }
        }
        let candidate = Witness {
            alt_cause: alt,
            ..mapped
        };
        if check_witness(self.original_query, &candidate)? {
            return Ok(candidate);
        }
        let direct = is_weak_cause_bruteforce(self.original_query, &opts.brute)?;
        direct.witness.ok_or_else(|| Error::NotApplicable {
            algorithm: "brute".into(),
            reason: "witness reconstruction failed".into(),
        })
    }
}

fn decide_auto(m: &CausalModel, q: &CauseQuery, opts: &DecisionOptions) -> Result<Decision> {
    if !ac1_holds(q)? {
        return Ok(Decision::plain(false, "ac1"));
    }
    if opts.want_witness {
        // witnesses live in the oracle's search space
        let staged = Staged::prepare(m, q)?;
        return staged.brute_on_reduced(opts);
    }
    let staged = Staged::prepare(m, q)?;
    if staged.is_empty_cause() {
        // no cause member reaches the event: AC2(a) and AC2(b) at Ẑ = ∅
        // contradict each other
        let mut d = Decision::plain(false, "strip");
        d.reduction = Some(staged.summary.clone());
        return Ok(d);
    }
    if let Some((y_var, y_val)) = q.event.as_primitive() {
        if let Some(d) = staged.try_tree(y_var, y_val, opts)? {
            return Ok(d);
        }
        if let Some(d) = staged.try_layered(y_var, y_val, opts)? {
            return Ok(d);
        }
    }
    if let Some(d) = staged.try_trivial_decomp(opts)? {
        return Ok(d);
    }
    staged.brute_on_reduced(opts)
}

fn tree_trace(
    m: &CausalModel,
    nodes: &[VarId],
    levels: &[std::collections::BTreeSet<std::collections::BTreeSet<crate::model::Value>>],
) -> Json {
    let out: Vec<Json> = levels
        .iter()
        .enumerate()
        .map(|(i, sets)| {
            let var = nodes[i];
            let rendered: Vec<Json> = sets
                .iter()
                .map(|s| {
                    Json::Array(
                        s.iter()
                            .map(|v| Json::String(m.domain(var).symbol(*v).to_string()))
                            .collect(),
                    )
                })
                .collect();
            json!({ "level": i, "variable": m.name(var), "sets": rendered })
        })
        .collect();
    Json::Array(out)
}

fn triple_trace(m: &CausalModel, rel: &TripleRelation) -> Json {
    let out: Vec<Json> = rel
        .levels
        .iter()
        .enumerate()
        .map(|(i, triples)| {
            let rendered: Vec<Json> = triples
                .iter()
                .map(|t| {
                    let tuple = |vals: &Vec<crate::model::Value>| -> Json {
                        Json::Array(
                            t.f.iter()
                                .zip(vals)
                                .map(|(var, v)| {
                                    Json::String(m.domain(*var).symbol(*v).to_string())
                                })
                                .collect(),
                        )
                    };
                    json!({
                        "F": t.f.iter().map(|&v| m.name(v)).collect::<Vec<_>>(),
                        "p": t.p.iter().map(tuple).collect::<Vec<_>>(),
                        "q": t.q.iter().map(tuple).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json!({ "level": i, "triples": rendered })
        })
        .collect();
    Json::Array(out)
}

/// A [`WeakCauseBackend`] that routes through the dispatcher, optionally
/// falling back to the oracle when a specialized algorithm does not apply.
#[derive(Debug, Clone)]
pub struct AlgoBackend {
    pub algorithm: Algorithm,
    pub decomposition: Option<Decomposition>,
    pub brute: BruteOptions,
    pub allow_fallback: bool,
}

impl AlgoBackend {
    pub fn auto() -> Self {
        AlgoBackend {
            algorithm: Algorithm::Auto,
            decomposition: None,
            brute: BruteOptions::default(),
            allow_fallback: true,
        }
    }
}

impl WeakCauseBackend for AlgoBackend {
    fn name(&self) -> &'static str {
        match self.algorithm {
            Algorithm::Auto => "auto",
            Algorithm::Brute => "brute",
            Algorithm::Tree => "tree",
            Algorithm::Layered => "layered",
            Algorithm::Decomp => "decomp",
        }
    }

    fn decide(
        &self,
        m: &CausalModel,
        cause: &Assignment,
        phi: &Event,
        u: &Assignment,
    ) -> Result<bool> {
        let opts = DecisionOptions {
            algorithm: Some(self.algorithm),
            decomposition: self.decomposition.clone(),
            brute: self.brute,
            ..Default::default()
        };
        match decide_weak_cause(m, cause, phi, u, &opts) {
            Ok(d) => Ok(d.holds),
            Err(Error::NotApplicable { .. }) if self.allow_fallback => {
                let q = CauseQuery::new(m, cause, u, phi.clone())?;
                Ok(is_weak_cause_bruteforce(&q, &self.brute)?.is_cause)
            }
            Err(e) => Err(e),
        }
    }
}
