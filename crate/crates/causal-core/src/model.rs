//! Recursive structural causal models over finite symbolic domains.
//!
//! A model `M = (U, V, F)` has exogenous variables `U`, endogenous variables
//! `V`, and one mechanism `F_X : D(PA_X) -> D(X)` per endogenous `X`. Models
//! are recursive: the endogenous parent relation is acyclic, so every total
//! context `u` over `U` determines a unique solution, computed here in a
//! cached topological order. All types are immutable after construction and
//! safe to share across threads.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a variable in a model's arena. Only meaningful together with the
/// model that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a value within its variable's domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(pub u32);

impl Value {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Exogenous,
    Endogenous,
}

/// Ordered, non-empty list of value symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    values: Vec<String>,
}

impl Domain {
    pub fn new<S: Into<String>>(values: impl IntoIterator<Item = S>) -> Self {
        Domain {
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn symbol(&self, v: Value) -> &str {
        &self.values[v.index()]
    }

    pub fn position(&self, symbol: &str) -> Option<Value> {
        self.values
            .iter()
            .position(|s| s == symbol)
            .map(|i| Value(i as u32))
    }

    /// Values in declared order.
    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        (0..self.values.len() as u32).map(Value)
    }

    pub fn symbols(&self) -> &[String] {
        &self.values
    }
}

/// A named variable with its kind and domain.
#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub domain: Domain,
}

/// Partial or total mapping from variables to domain values.
///
/// Iteration order is by `VarId`, which makes assignments canonical for a
/// fixed model.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Assignment {
    bindings: BTreeMap<VarId, Value>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, Value)>) -> Self {
        Assignment {
            bindings: pairs.into_iter().collect(),
        }
    }

    pub fn bind(&mut self, var: VarId, value: Value) {
        self.bindings.insert(var, value);
    }

    pub fn get(&self, var: VarId) -> Option<Value> {
        self.bindings.get(&var).copied()
    }

    pub fn binds(&self, var: VarId) -> bool {
        self.bindings.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, Value)> + '_ {
        self.bindings.iter().map(|(k, v)| (*k, *v))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.bindings.keys().copied()
    }

    /// Restriction of this assignment to `vars` (silently drops unbound ones).
    pub fn restrict(&self, vars: impl IntoIterator<Item = VarId>) -> Assignment {
        let mut out = Assignment::new();
        for v in vars {
            if let Some(val) = self.get(v) {
                out.bind(v, val);
            }
        }
        out
    }
}

/// The merge `[a|b]`: the union of `a` restricted away from `b`'s variables
/// and `b`. On shared variables `b` wins.
pub fn merge(a: &Assignment, b: &Assignment) -> Assignment {
    let mut out = a.clone();
    for (var, val) in b.iter() {
        out.bind(var, val);
    }
    out
}

/// A mechanism for one endogenous variable: a total function from parent
/// values to a value of the owning variable.
#[derive(Debug, Clone)]
pub struct Mechanism {
    /// Parents in declared order; table rows are keyed by this order.
    pub parents: Vec<VarId>,
    pub(crate) body: MechanismBody,
}

#[derive(Debug, Clone)]
pub(crate) enum MechanismBody {
    /// Explicit table in row-major order over the parent domain product
    /// (first parent varies slowest).
    Table(Vec<Value>),
    /// Deferred natural-value function used by model reduction when the
    /// exogenous ancestor product is too large to tabulate: the owning
    /// variable's value is the value `target` takes in `origin` under any
    /// context extending the given parent values.
    Natural {
        origin: Arc<CausalModel>,
        target: VarId,
        origin_parents: Vec<VarId>,
    },
}

impl Mechanism {
    /// Constant mechanism (no parents).
    pub fn constant(value: Value) -> Self {
        Mechanism {
            parents: Vec::new(),
            body: MechanismBody::Table(vec![value]),
        }
    }

    pub fn table(parents: Vec<VarId>, rows: Vec<Value>) -> Self {
        Mechanism {
            parents,
            body: MechanismBody::Table(rows),
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self.body, MechanismBody::Table(_))
    }

    /// Applies the mechanism to parent values given in declared parent order.
    pub fn apply(&self, parent_values: &[Value], sizes: &[usize]) -> Result<Value> {
        match &self.body {
            MechanismBody::Table(rows) => {
                let mut idx = 0usize;
                for (v, size) in parent_values.iter().zip(sizes) {
                    idx = idx * size + v.index();
                }
                Ok(rows[idx])
            }
            MechanismBody::Natural {
                origin,
                target,
                origin_parents,
            } => {
                let mut u = Assignment::new();
                for (ov, val) in origin_parents.iter().zip(parent_values) {
                    u.bind(*ov, *val);
                }
                // Any extension of the bound exogenous ancestors yields the
                // same value for `target`, so fill the rest arbitrarily.
                for id in origin.exogenous_ids() {
                    if !u.binds(id) {
                        u.bind(id, Value(0));
                    }
                }
                let out = origin.eval_intervened(&Assignment::new(), &u, &[*target])?;
                Ok(out.get(*target).expect("target evaluated"))
            }
        }
    }
}

/// A recursive causal model.
#[derive(Debug, Clone)]
pub struct CausalModel {
    vars: Vec<Variable>,
    by_name: BTreeMap<String, VarId>,
    /// Indexed like `vars`; `None` for exogenous variables.
    mechanisms: Vec<Option<Mechanism>>,
    /// Endogenous variables in a topological order of the parent relation.
    topo: Vec<VarId>,
    /// Children (endogenous) of every variable, cached for graph walks.
    children: Vec<Vec<VarId>>,
}

impl CausalModel {
    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.vars[id.index()]
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id.index()].name
    }

    pub fn kind(&self, id: VarId) -> VarKind {
        self.vars[id.index()].kind
    }

    pub fn domain(&self, id: VarId) -> &Domain {
        &self.vars[id.index()].domain
    }

    pub fn lookup(&self, name: &str) -> Result<VarId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn mechanism(&self, id: VarId) -> Option<&Mechanism> {
        self.mechanisms[id.index()].as_ref()
    }

    /// Endogenous children of `id` (cached).
    pub fn children(&self, id: VarId) -> &[VarId] {
        &self.children[id.index()]
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        self.mechanisms[id.index()]
            .as_ref()
            .map(|m| m.parents.as_slice())
            .unwrap_or(&[])
    }

    /// All variable ids in name order (arena order).
    pub fn all_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len() as u32).map(VarId)
    }

    pub fn exogenous_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        self.all_ids()
            .filter(|id| self.kind(*id) == VarKind::Exogenous)
    }

    pub fn endogenous_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        self.all_ids()
            .filter(|id| self.kind(*id) == VarKind::Endogenous)
    }

    pub fn exogenous_count(&self) -> usize {
        self.exogenous_ids().count()
    }

    pub fn endogenous_count(&self) -> usize {
        self.topo.len()
    }

    /// The cached topological order of the endogenous variables.
    pub fn topo_order(&self) -> &[VarId] {
        &self.topo
    }

    /// Renders an assignment with variable and value names, for messages.
    pub fn show(&self, a: &Assignment) -> String {
        let parts: Vec<String> = a
            .iter()
            .map(|(var, val)| format!("{}={}", self.name(var), self.domain(var).symbol(val)))
            .collect();
        parts.join(",")
    }

    pub fn value_named(&self, var: VarId, symbol: &str) -> Result<Value> {
        self.domain(var)
            .position(symbol)
            .ok_or_else(|| Error::ValueOutOfDomain {
                var: self.name(var).to_string(),
                value: symbol.to_string(),
            })
    }

    /// Parses `"A=1,B=0"` into an assignment.
    pub fn parse_bindings(&self, text: &str) -> Result<Assignment> {
        let mut out = Assignment::new();
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(out);
        }
        for part in trimmed.split(',') {
            let mut halves = part.splitn(2, '=');
            let name = halves.next().unwrap_or("").trim();
            let value = halves.next().unwrap_or("").trim();
            if name.is_empty() || value.is_empty() {
                return Err(Error::EventSyntax {
                    position: 0,
                    message: format!("malformed binding `{part}` (expected NAME=VALUE)"),
                });
            }
            let id = self.lookup(name)?;
            let v = self.value_named(id, value)?;
            out.bind(id, v);
        }
        Ok(out)
    }

    fn check_context(&self, u: &Assignment) -> Result<()> {
        for id in self.exogenous_ids() {
            if !u.binds(id) {
                return Err(Error::UnboundExogenous(self.name(id).to_string()));
            }
        }
        for var in u.vars() {
            if self.kind(var) != VarKind::Exogenous {
                return Err(Error::ContextBindsEndogenous(self.name(var).to_string()));
            }
        }
        Ok(())
    }

    fn check_intervention(&self, x: &Assignment) -> Result<()> {
        for var in x.vars() {
            if self.kind(var) != VarKind::Endogenous {
                return Err(Error::InterventionOnExogenous(self.name(var).to_string()));
            }
        }
        Ok(())
    }

    /// `Y_M(u)`: the unique total endogenous assignment determined by the
    /// context `u`, computed in topological order.
    pub fn evaluate(&self, u: &Assignment) -> Result<Assignment> {
        self.check_context(u)?;
        let mut memo: Vec<Option<Value>> = vec![None; self.vars.len()];
        for (var, val) in u.iter() {
            memo[var.index()] = Some(val);
        }
        let mut parent_vals: Vec<Value> = Vec::new();
        let mut sizes: Vec<usize> = Vec::new();
        for &id in &self.topo {
            let mech = self.mechanisms[id.index()].as_ref().expect("endogenous");
            parent_vals.clear();
            sizes.clear();
            for &p in &mech.parents {
                parent_vals.push(memo[p.index()].expect("parents precede children"));
                sizes.push(self.domain(p).len());
            }
            memo[id.index()] = Some(mech.apply(&parent_vals, &sizes)?);
        }
        let mut out = Assignment::new();
        for id in self.endogenous_ids() {
            out.bind(id, memo[id.index()].expect("total"));
        }
        Ok(out)
    }

    /// `Y_x(u)` restricted to `targets`: evaluates under the intervention `x`
    /// without materializing the submodel, touching only ancestors of the
    /// targets (cut at intervened variables).
    pub fn eval_intervened(
        &self,
        x: &Assignment,
        u: &Assignment,
        targets: &[VarId],
    ) -> Result<Assignment> {
        self.check_intervention(x)?;
        let mut ev = Evaluator::new(self);
        ev.set_context(u)?;
        ev.begin();
        for (var, val) in x.iter() {
            ev.intervene(var, val);
        }
        let mut out = Assignment::new();
        for &t in targets {
            out.bind(t, ev.value(t)?);
        }
        Ok(out)
    }

    /// The submodel `M_x`: every variable bound by `x` gets a constant
    /// mechanism, everything else is unchanged.
    pub fn submodel(&self, x: &Assignment) -> Result<CausalModel> {
        self.check_intervention(x)?;
        let mut mechanisms = self.mechanisms.clone();
        for (var, val) in x.iter() {
            mechanisms[var.index()] = Some(Mechanism::constant(val));
        }
        CausalModel::assemble(self.vars.clone(), mechanisms)
    }

    /// Validates parts and computes the cached topological order and child
    /// lists. This is the single constructor path; all invariants are
    /// enforced here.
    pub(crate) fn assemble(
        vars: Vec<Variable>,
        mechanisms: Vec<Option<Mechanism>>,
    ) -> Result<CausalModel> {
        let mut by_name = BTreeMap::new();
        for (i, v) in vars.iter().enumerate() {
            if v.domain.is_empty() {
                return Err(Error::EmptyDomain(v.name.clone()));
            }
            let mut seen = std::collections::BTreeSet::new();
            for s in v.domain.symbols() {
                if !seen.insert(s) {
                    return Err(Error::DuplicateValue {
                        var: v.name.clone(),
                        value: s.clone(),
                    });
                }
            }
            if by_name.insert(v.name.clone(), VarId(i as u32)).is_some() {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let n = vars.len();
        let mut children: Vec<Vec<VarId>> = vec![Vec::new(); n];
        for (i, mech) in mechanisms.iter().enumerate() {
            let id = VarId(i as u32);
            match (vars[i].kind, mech) {
                (VarKind::Exogenous, Some(_)) => {
                    return Err(Error::ExogenousWithMechanism(vars[i].name.clone()))
                }
                (VarKind::Endogenous, None) => {
                    return Err(Error::NonTotalTable {
                        var: vars[i].name.clone(),
                        combo: "<no mechanism>".into(),
                    })
                }
                (VarKind::Endogenous, Some(m)) => {
                    let mut seen = std::collections::BTreeSet::new();
                    let mut expected = 1usize;
                    for &p in &m.parents {
                        if p.index() >= n {
                            return Err(Error::UnknownParent {
                                child: vars[i].name.clone(),
                                parent: format!("#{}", p.0),
                            });
                        }
                        if p == id {
                            return Err(Error::SelfParent(vars[i].name.clone()));
                        }
                        if !seen.insert(p) {
                            return Err(Error::DuplicateParent {
                                child: vars[i].name.clone(),
                                parent: vars[p.index()].name.clone(),
                            });
                        }
                        expected = expected.saturating_mul(vars[p.index()].domain.len());
                        children[p.index()].push(id);
                    }
                    if let MechanismBody::Table(rows) = &m.body {
                        if rows.len() != expected {
                            return Err(Error::TableSizeMismatch {
                                var: vars[i].name.clone(),
                                got: rows.len(),
                                expected,
                            });
                        }
                        for v in rows {
                            if v.index() >= vars[i].domain.len() {
                                return Err(Error::ValueOutOfDomain {
                                    var: vars[i].name.clone(),
                                    value: format!("#{}", v.0),
                                });
                            }
                        }
                    }
                }
                (VarKind::Exogenous, None) => {}
            }
        }

        // Kahn's algorithm over the endogenous parent relation.
        let mut indegree: Vec<usize> = vec![0; n];
        for (i, mech) in mechanisms.iter().enumerate() {
            if let Some(m) = mech {
                indegree[i] = m
                    .parents
                    .iter()
                    .filter(|p| vars[p.index()].kind == VarKind::Endogenous)
                    .count();
            }
        }
        let mut queue: Vec<VarId> = (0..n)
            .filter(|&i| vars[i].kind == VarKind::Endogenous && indegree[i] == 0)
            .map(|i| VarId(i as u32))
            .collect();
        queue.sort();
        let mut topo: Vec<VarId> = Vec::new();
        let mut head = 0;
        while head < queue.len() {
            let id = queue[head];
            head += 1;
            topo.push(id);
            for &c in &children[id.index()] {
                indegree[c.index()] -= 1;
                if indegree[c.index()] == 0 {
                    queue.push(c);
                }
            }
        }
        let endo_count = vars
            .iter()
            .filter(|v| v.kind == VarKind::Endogenous)
            .count();
        if topo.len() != endo_count {
            let stuck: Vec<&str> = (0..n)
                .filter(|&i| vars[i].kind == VarKind::Endogenous && indegree[i] > 0)
                .map(|i| vars[i].name.as_str())
                .collect();
            return Err(Error::NotRecursive(stuck.join(", ")));
        }
        Ok(CausalModel {
            vars,
            by_name,
            mechanisms,
            topo,
            children,
        })
    }
}

/// Reusable demand-driven evaluator with epoch-stamped memoization.
///
/// One `begin()` starts a fresh evaluation: interventions registered after it
/// shadow mechanisms, everything else is computed lazily from the context.
/// Nothing is cleared between evaluations, so the per-call cost is
/// proportional to the variables actually touched. This is the engine behind
/// the oracle search and the relation builders.
pub struct Evaluator<'m> {
    m: &'m CausalModel,
    epoch: u32,
    itv_epoch: Vec<u32>,
    itv_val: Vec<Value>,
    memo_epoch: Vec<u32>,
    memo_val: Vec<Value>,
    u_bound: Vec<bool>,
    u_val: Vec<Value>,
    stack: Vec<VarId>,
    /// Evaluation rounds (`begin` calls) performed so far.
    pub evals: u64,
    /// Mechanism applications performed so far.
    pub lookups: u64,
}

impl<'m> Evaluator<'m> {
    pub fn new(m: &'m CausalModel) -> Self {
        let n = m.var_count();
        Evaluator {
            m,
            epoch: 0,
            itv_epoch: vec![0; n],
            itv_val: vec![Value(0); n],
            memo_epoch: vec![0; n],
            memo_val: vec![Value(0); n],
            u_bound: vec![false; n],
            u_val: vec![Value(0); n],
            stack: Vec::new(),
            evals: 0,
            lookups: 0,
        }
    }

    pub fn model(&self) -> &'m CausalModel {
        self.m
    }

    /// Installs the context; must bind every exogenous variable and nothing
    /// else.
    pub fn set_context(&mut self, u: &Assignment) -> Result<()> {
        self.m.check_context(u)?;
        for b in self.u_bound.iter_mut() {
            *b = false;
        }
        for (var, val) in u.iter() {
            self.u_bound[var.index()] = true;
            self.u_val[var.index()] = val;
        }
        // context changes invalidate all memoized values
        self.reset_epochs();
        Ok(())
    }

    fn reset_epochs(&mut self) {
        self.epoch = 0;
        for e in self.itv_epoch.iter_mut() {
            *e = 0;
        }
        for e in self.memo_epoch.iter_mut() {
            *e = 0;
        }
    }

    /// Starts a fresh evaluation round.
    pub fn begin(&mut self) {
        if self.epoch == u32::MAX {
            self.reset_epochs();
        }
        self.epoch += 1;
        self.evals += 1;
    }

    /// Registers `var := val` for the current round.
    pub fn intervene(&mut self, var: VarId, val: Value) {
        debug_assert_eq!(self.m.kind(var), VarKind::Endogenous);
        self.itv_epoch[var.index()] = self.epoch;
        self.itv_val[var.index()] = val;
    }

    pub fn intervene_all(&mut self, x: &Assignment) {
        for (var, val) in x.iter() {
            self.intervene(var, val);
        }
    }

    /// The value of `target` in the current round.
    pub fn value(&mut self, target: VarId) -> Result<Value> {
        debug_assert!(self.epoch > 0, "call begin() before value()");
        if self.memo_epoch[target.index()] == self.epoch {
            return Ok(self.memo_val[target.index()]);
        }
        self.stack.clear();
        self.stack.push(target);
        let mut parent_vals: Vec<Value> = Vec::new();
        let mut sizes: Vec<usize> = Vec::new();
        while let Some(&id) = self.stack.last() {
            let i = id.index();
            if self.memo_epoch[i] == self.epoch {
                self.stack.pop();
                continue;
            }
            if self.itv_epoch[i] == self.epoch {
                self.memo_epoch[i] = self.epoch;
                self.memo_val[i] = self.itv_val[i];
                self.stack.pop();
                continue;
            }
            if self.m.kind(id) == VarKind::Exogenous {
                if !self.u_bound[i] {
                    return Err(Error::UnboundExogenous(self.m.name(id).to_string()));
                }
                self.memo_epoch[i] = self.epoch;
                self.memo_val[i] = self.u_val[i];
                self.stack.pop();
                continue;
            }
            let mech = self.m.mechanisms[i].as_ref().expect("endogenous");
            let mut ready = true;
            for &p in &mech.parents {
                let pi = p.index();
                if self.memo_epoch[pi] != self.epoch && self.itv_epoch[pi] != self.epoch {
                    if self.m.kind(p) == VarKind::Exogenous {
                        if !self.u_bound[pi] {
                            return Err(Error::UnboundExogenous(self.m.name(p).to_string()));
                        }
                        self.memo_epoch[pi] = self.epoch;
                        self.memo_val[pi] = self.u_val[pi];
                    } else {
                        self.stack.push(p);
                        ready = false;
                    }
                }
            }
            if !ready {
                continue;
            }
            parent_vals.clear();
            sizes.clear();
            for &p in &mech.parents {
                let pi = p.index();
                let v = if self.memo_epoch[pi] == self.epoch {
                    self.memo_val[pi]
                } else {
                    self.itv_val[pi]
                };
                parent_vals.push(v);
                sizes.push(self.m.domain(p).len());
            }
            self.lookups += 1;
            self.memo_val[i] = mech.apply(&parent_vals, &sizes)?;
            self.memo_epoch[i] = self.epoch;
            self.stack.pop();
        }
        Ok(self.memo_val[target.index()])
    }

    /// Truth of `phi` in the current round.
    pub fn holds(&mut self, phi: &crate::event::Event) -> Result<bool> {
        use crate::event::Event;
        match phi {
            Event::Prim(var, val) => Ok(self.value(*var)? == *val),
            Event::Not(e) => Ok(!self.holds(e)?),
            Event::And(a, b) => Ok(self.holds(a)? && self.holds(b)?),
        }
    }
}

impl fmt::Display for CausalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CausalModel(|U|={}, |V|={})",
            self.exogenous_count(),
            self.endogenous_count()
        )
    }
}

/// Incremental constructor used by tests, the generator, and the codecs.
#[derive(Debug, Default)]
pub struct ModelBuilder {
    vars: Vec<Variable>,
    pending: Vec<PendingMechanism>,
}

#[derive(Debug)]
struct PendingMechanism {
    var: String,
    parents: Vec<String>,
    rows: Vec<String>,
}

impl ModelBuilder {
    pub fn new() -> Self {
        ModelBuilder::default()
    }

    pub fn exogenous<S: Into<String>>(
        mut self,
        name: &str,
        values: impl IntoIterator<Item = S>,
    ) -> Self {
        self.vars.push(Variable {
            name: name.to_string(),
            kind: VarKind::Exogenous,
            domain: Domain::new(values),
        });
        self
    }

    /// Adds an endogenous variable with an explicit table: `rows` holds the
    /// output symbol for each parent combination in row-major declared order
    /// (first parent varies slowest).
    pub fn endogenous<S: Into<String>, R: Into<String>>(
        mut self,
        name: &str,
        values: impl IntoIterator<Item = S>,
        parents: &[&str],
        rows: impl IntoIterator<Item = R>,
    ) -> Self {
        self.vars.push(Variable {
            name: name.to_string(),
            kind: VarKind::Endogenous,
            domain: Domain::new(values),
        });
        self.pending.push(PendingMechanism {
            var: name.to_string(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            rows: rows.into_iter().map(Into::into).collect(),
        });
        self
    }

    /// Adds an endogenous variable whose table is produced by `f`, called
    /// once per parent combination with the parent value symbols in declared
    /// order.
    pub fn endogenous_fn<S: Into<String>>(
        self,
        name: &str,
        values: impl IntoIterator<Item = S>,
        parents: &[&str],
        f: impl Fn(&[&str]) -> String,
    ) -> Self {
        let domains: Vec<Vec<String>> = parents
            .iter()
            .map(|p| {
                self.vars
                    .iter()
                    .find(|v| &v.name == p)
                    .map(|v| v.domain.symbols().to_vec())
                    .unwrap_or_default()
            })
            .collect();
        let mut rows: Vec<String> = Vec::new();
        let mut combo: Vec<usize> = vec![0; parents.len()];
        loop {
            let syms: Vec<&str> = combo
                .iter()
                .zip(&domains)
                .map(|(&i, d)| d[i].as_str())
                .collect();
            rows.push(f(&syms));
            // odometer increment, last parent fastest
            let mut pos = parents.len();
            loop {
                if pos == 0 {
                    return self.endogenous(name, values, parents, rows);
                }
                pos -= 1;
                combo[pos] += 1;
                if combo[pos] < domains[pos].len() {
                    break;
                }
                combo[pos] = 0;
            }
        }
    }

    pub fn build(self) -> Result<CausalModel> {
        let vars = self.vars;
        let mut name_to_id: BTreeMap<String, u32> = BTreeMap::new();
        for (i, v) in vars.iter().enumerate() {
            name_to_id.insert(v.name.clone(), i as u32);
        }
        let mut mechanisms: Vec<Option<Mechanism>> = vec![None; vars.len()];
        for pm in self.pending {
            let id = *name_to_id
                .get(&pm.var)
                .ok_or_else(|| Error::UnknownVariable(pm.var.clone()))? as usize;
            let mut parents = Vec::new();
            for p in &pm.parents {
                let pid = name_to_id
                    .get(p)
                    .copied()
                    .ok_or_else(|| Error::UnknownParent {
                        child: pm.var.clone(),
                        parent: p.clone(),
                    })?;
                parents.push(VarId(pid));
            }
            let mut rows = Vec::new();
            for r in &pm.rows {
                let v = vars[id]
                    .domain
                    .position(r)
                    .ok_or_else(|| Error::ValueOutOfDomain {
                        var: pm.var.clone(),
                        value: r.clone(),
                    })?;
                rows.push(v);
            }
            mechanisms[id] = Some(Mechanism::table(parents, rows));
        }
        CausalModel::assemble(vars, mechanisms)
    }
}
