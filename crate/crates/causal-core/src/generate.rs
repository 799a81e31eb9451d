//! Seeded random model generation for the property and scaling suites.
//!
//! Every shape comes with a designated query `(X, Y)` that the corresponding
//! detector is guaranteed to accept: chains and trees route through
//! `detect_tree`, layered models through `detect_layered`, and random DAGs
//! exercise reduction plus the brute-force path. Generation is a pure
//! function of the config; the same seed always yields the same model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CausalModel, ModelBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Chain,
    Tree,
    Layered,
    RandomDag,
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Shape::Chain),
            "tree" => Ok(Shape::Tree),
            "layered" => Ok(Shape::Layered),
            "random-dag" => Ok(Shape::RandomDag),
            other => Err(Error::InfeasibleBounds(format!(
                "unknown shape `{other}` (chain|tree|layered|random-dag)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GeneratorConfig {
    pub shape: Shape,
    /// Number of endogenous variables.
    pub vars: usize,
    /// Domain sizes are drawn from `2..=max_domain`.
    pub max_domain: usize,
    /// Ceiling on endogenous parents per variable (an exogenous driver may
    /// come on top).
    pub max_in_degree: usize,
    /// Layer width for the layered shape.
    pub layer_width: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            shape: Shape::RandomDag,
            vars: 5,
            max_domain: 2,
            max_in_degree: 3,
            layer_width: 2,
            seed: 0,
        }
    }
}

/// A generated model with its designated query variables.
#[derive(Debug, Clone)]
pub struct GeneratedModel {
    pub model: CausalModel,
    /// Suggested cause variables (names).
    pub cause: Vec<String>,
    /// Suggested event variable (name).
    pub target: String,
}

struct Ctx {
    rng: ChaCha8Rng,
    exo: Vec<(String, usize)>,
    endo: Vec<EndoSpec>,
}

struct EndoSpec {
    name: String,
    domain: usize,
    parents: Vec<String>,
}

impl Ctx {
    fn new(seed: u64) -> Self {
        Ctx {
            rng: ChaCha8Rng::seed_from_u64(seed),
            exo: Vec::new(),
            endo: Vec::new(),
        }
    }

    fn domain_size(&mut self, max_domain: usize) -> usize {
        if max_domain < 2 {
            1
        } else {
            self.rng.gen_range(2..=max_domain)
        }
    }

    fn fresh_exo(&mut self, max_domain: usize) -> String {
        let name = format!("U{:03}", self.exo.len());
        let size = self.domain_size(max_domain);
        self.exo.push((name.clone(), size));
        name
    }

    fn push_endo(&mut self, name: String, domain: usize, parents: Vec<String>) {
        self.endo.push(EndoSpec {
            name,
            domain,
            parents,
        });
    }

    fn build(mut self) -> Result<CausalModel> {
        let mut b = ModelBuilder::new();
        let symbols = |n: usize| -> Vec<String> { (0..n).map(|i| i.to_string()).collect() };
        for (name, size) in &self.exo {
            b = b.exogenous(name, symbols(*size));
        }
        let sizes: std::collections::BTreeMap<String, usize> = self
            .exo
            .iter()
            .cloned()
            .chain(self.endo.iter().map(|e| (e.name.clone(), e.domain)))
            .collect();
        for spec in &self.endo {
            let mut rows_count = 1usize;
            for p in &spec.parents {
                rows_count *= sizes[p];
            }
            let rows: Vec<String> = (0..rows_count)
                .map(|_| self.rng.gen_range(0..spec.domain).to_string())
                .collect();
            let parent_refs: Vec<&str> = spec.parents.iter().map(String::as_str).collect();
            b = b.endogenous(&spec.name, symbols(spec.domain), &parent_refs, rows);
        }
        b.build()
    }
}

/// Generates a model; deterministic under a fixed config.
pub fn generate_model(cfg: &GeneratorConfig) -> Result<GeneratedModel> {
    if cfg.vars == 0 {
        return Err(Error::InfeasibleBounds("need at least one variable".into()));
    }
    if cfg.max_in_degree == 0 {
        return Err(Error::InfeasibleBounds("max in-degree must be positive".into()));
    }
    match cfg.shape {
        Shape::Chain => chain(cfg),
        Shape::Tree => tree(cfg),
        Shape::Layered => layered(cfg),
        Shape::RandomDag => random_dag(cfg),
    }
}

fn vname(i: usize) -> String {
    format!("V{:03}", i)
}

/// `X = V000 -> V001 -> … -> Y`, every node optionally driven by its own
/// exogenous input.
fn chain(cfg: &GeneratorConfig) -> Result<GeneratedModel> {
    if cfg.vars < 2 {
        return Err(Error::InfeasibleBounds("a chain needs at least 2 variables".into()));
    }
    let mut ctx = Ctx::new(cfg.seed);
    for i in 0..cfg.vars {
        let mut parents = Vec::new();
        if i > 0 {
            parents.push(vname(i - 1));
        }
        if i == 0 || ctx.rng.gen_bool(0.5) {
            let u = ctx.fresh_exo(cfg.max_domain);
            parents.push(u);
        }
        let d = ctx.domain_size(cfg.max_domain);
        ctx.push_endo(vname(i), d, parents);
    }
    Ok(GeneratedModel {
        model: ctx.build()?,
        cause: vec![vname(0)],
        target: vname(cfg.vars - 1),
    })
}

/// A path `X → … → Y` with sibling parents hanging off every path node, so
/// the relevant graph for `(X, Y)` is exactly a directed tree rooted at `Y`.
fn tree(cfg: &GeneratorConfig) -> Result<GeneratedModel> {
    if cfg.vars < 2 {
        return Err(Error::InfeasibleBounds("a tree needs at least 2 variables".into()));
    }
    let mut ctx = Ctx::new(cfg.seed);
    // path length: at least 1 edge, at most the variable budget
    let max_k = cfg.vars - 1;
    let k = if max_k == 1 {
        1
    } else {
        ctx.rng.gen_range(1..=max_k.min(6))
    };
    let mut names: Vec<String> = (0..=k).map(vname).collect(); // names[i] = P^i, names[0] = Y
    let mut next = k + 1;
    let mut budget = cfg.vars - (k + 1);
    // siblings for each path child P^{i-1}: other parents of the child
    let mut parents_of: Vec<Vec<String>> = vec![Vec::new(); k + 1];
    for i in 1..=k {
        parents_of[i - 1].push(names[i].clone());
        let extra_cap = (cfg.max_in_degree - 1).min(budget);
        let extra = if extra_cap == 0 {
            0
        } else {
            ctx.rng.gen_range(0..=extra_cap)
        };
        for _ in 0..extra {
            let sib = vname(next);
            next += 1;
            budget -= 1;
            let u = ctx.fresh_exo(cfg.max_domain);
            let d = ctx.domain_size(cfg.max_domain);
            ctx.push_endo(sib.clone(), d, vec![u]);
            parents_of[i - 1].push(sib);
        }
    }
    // the cause itself is exogenous-driven
    let ux = ctx.fresh_exo(cfg.max_domain);
    let dx = ctx.domain_size(cfg.max_domain);
    ctx.push_endo(names[k].clone(), dx, vec![ux]);
    for i in (0..k).rev() {
        let d = ctx.domain_size(cfg.max_domain);
        let ps = std::mem::take(&mut parents_of[i]);
        ctx.push_endo(names[i].clone(), d, ps);
    }
    let x = names[k].clone();
    let y = names.remove(0);
    Ok(GeneratedModel {
        model: ctx.build()?,
        cause: vec![x],
        target: y,
    })
}

/// Layers `S^k … S^0 = {Y}` with every edge dropping exactly one layer,
/// every non-root variable having a child below, and every non-top variable
/// a parent above.
fn layered(cfg: &GeneratorConfig) -> Result<GeneratedModel> {
    if cfg.vars < 2 {
        return Err(Error::InfeasibleBounds("a layered model needs at least 2 variables".into()));
    }
    if cfg.layer_width == 0 {
        return Err(Error::InfeasibleBounds("layer width must be positive".into()));
    }
    let mut ctx = Ctx::new(cfg.seed);
    // carve layer sizes: S^0 = {Y}, then widths of 1..=layer_width
    let mut sizes = vec![1usize];
    let mut used = 1;
    while used < cfg.vars {
        let w = ctx
            .rng
            .gen_range(1..=cfg.layer_width.min(cfg.vars - used));
        sizes.push(w);
        used += w;
    }
    if sizes.len() < 2 {
        return Err(Error::InfeasibleBounds(
            "variable budget admits only the root layer".into(),
        ));
    }
    let mut idx = 0usize;
    let layers: Vec<Vec<String>> = sizes
        .iter()
        .map(|&w| {
            (0..w)
                .map(|_| {
                    let n = vname(idx);
                    idx += 1;
                    n
                })
                .collect()
        })
        .collect();
    let k = layers.len() - 1;
    // edges: each layer-i variable gets >= 1 child in layer i-1; each
    // layer-(i-1) variable gets >= 1 parent, respecting max_in_degree
    let mut parent_lists: Vec<Vec<Vec<String>>> = layers
        .iter()
        .map(|l| vec![Vec::new(); l.len()])
        .collect();
    for i in 1..=k {
        let below = i - 1;
        let nb = layers[below].len();
        for v in &layers[i] {
            let mut placed = false;
            for _ in 0..8 {
                let c = ctx.rng.gen_range(0..nb);
                if parent_lists[below][c].len() < cfg.max_in_degree {
                    parent_lists[below][c].push(v.clone());
                    placed = true;
                    break;
                }
            }
            if !placed {
                if let Some(c) = (0..nb).find(|&c| parent_lists[below][c].len() < cfg.max_in_degree)
                {
                    parent_lists[below][c].push(v.clone());
                } else {
                    return Err(Error::InfeasibleBounds(format!(
                        "layer {i} too wide for max in-degree {}",
                        cfg.max_in_degree
                    )));
                }
            }
        }
        for (c, plist) in parent_lists[below].iter_mut().enumerate() {
            let _ = c;
            if plist.is_empty() {
                let p = layers[i][ctx.rng.gen_range(0..layers[i].len())].clone();
                plist.push(p);
            } else if plist.len() < cfg.max_in_degree && ctx.rng.gen_bool(0.3) {
                let p = layers[i][ctx.rng.gen_range(0..layers[i].len())].clone();
                if !plist.contains(&p) {
                    plist.push(p);
                }
            }
        }
    }
    // declare from the top layer down so parents precede children
    for i in (0..=k).rev() {
        for (j, v) in layers[i].iter().enumerate() {
            let mut parents = parent_lists[i][j].clone();
            parents.sort();
            parents.dedup();
            if i == k || (ctx.rng.gen_bool(0.5) && parents.len() < cfg.max_in_degree + 1) {
                let u = ctx.fresh_exo(cfg.max_domain);
                parents.push(u);
            }
            let d = ctx.domain_size(cfg.max_domain);
            ctx.push_endo(v.clone(), d, parents);
        }
    }
    // designated cause: nonempty subset of the top layer
    let top = &layers[k];
    let count = ctx.rng.gen_range(1..=top.len());
    let mut cause: Vec<String> = top.clone();
    while cause.len() > count {
        let i = ctx.rng.gen_range(0..cause.len());
        cause.remove(i);
    }
    Ok(GeneratedModel {
        model: ctx.build()?,
        cause,
        target: layers[0][0].clone(),
    })
}

/// Arbitrary DAG in a random topological order.
fn random_dag(cfg: &GeneratorConfig) -> Result<GeneratedModel> {
    let mut ctx = Ctx::new(cfg.seed);
    for i in 0..cfg.vars {
        let cap = cfg.max_in_degree.min(i);
        let count = if cap == 0 { 0 } else { ctx.rng.gen_range(0..=cap) };
        let mut parents: Vec<String> = Vec::new();
        for _ in 0..count {
            let p = vname(ctx.rng.gen_range(0..i));
            if !parents.contains(&p) {
                parents.push(p);
            }
        }
        if parents.is_empty() || ctx.rng.gen_bool(0.4) {
            let u = ctx.fresh_exo(cfg.max_domain);
            parents.push(u);
        }
        let d = ctx.domain_size(cfg.max_domain);
        ctx.push_endo(vname(i), d, parents);
    }
    let target = vname(cfg.vars - 1);
    let cause = if cfg.vars == 1 {
        vec![vname(0)]
    } else {
        let first = ctx.rng.gen_range(0..cfg.vars - 1);
        let mut cause = vec![vname(first)];
        if cfg.vars > 2 && ctx.rng.gen_bool(0.4) {
            let second = ctx.rng.gen_range(0..cfg.vars - 1);
            if vname(second) != cause[0] {
                cause.push(vname(second));
            }
        }
        cause.sort();
        cause
    };
    Ok(GeneratedModel {
        model: ctx.build()?,
        cause,
        target,
    })
}

/// All total contexts of a model, in lexicographic domain order. Handy for
/// exhaustive sweeps over small models.
pub fn all_contexts(m: &CausalModel) -> Vec<crate::model::Assignment> {
    let exo: Vec<crate::model::VarId> = m.exogenous_ids().collect();
    let mut out = Vec::new();
    let _ = crate::iterate::for_each_value_tuple::<()>(m, &exo, |vals| {
        out.push(crate::model::Assignment::from_pairs(
            exo.iter().copied().zip(vals.iter().copied()),
        ));
        Ok(None)
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered::detect_layered;
    use crate::tree::detect_tree;

    #[test]
    fn deterministic_under_seed() {
        let cfg = GeneratorConfig {
            shape: Shape::Layered,
            vars: 7,
            max_domain: 3,
            max_in_degree: 2,
            layer_width: 2,
            seed: 7,
        };
        let a = generate_model(&cfg).unwrap();
        let b = generate_model(&cfg).unwrap();
        assert_eq!(
            crate::codec::model_to_json(&a.model).unwrap(),
            crate::codec::model_to_json(&b.model).unwrap()
        );
        assert_eq!(a.cause, b.cause);
    }

    #[test]
    fn tree_shape_detects() {
        for seed in 0..30 {
            let cfg = GeneratorConfig {
                shape: Shape::Tree,
                vars: 7,
                max_domain: 3,
                max_in_degree: 3,
                layer_width: 2,
                seed,
            };
            let g = generate_model(&cfg).unwrap();
            let x = g.model.lookup(&g.cause[0]).unwrap();
            let y = g.model.lookup(&g.target).unwrap();
            assert!(
                detect_tree(&g.model, x, y).is_some(),
                "seed {seed} did not detect as a tree"
            );
        }
    }

    #[test]
    fn layered_shape_detects() {
        for seed in 0..30 {
            let cfg = GeneratorConfig {
                shape: Shape::Layered,
                vars: 8,
                max_domain: 3,
                max_in_degree: 3,
                layer_width: 3,
                seed,
            };
            let g = generate_model(&cfg).unwrap();
            let xs: Vec<_> = g
                .cause
                .iter()
                .map(|n| g.model.lookup(n).unwrap())
                .collect();
            let y = g.model.lookup(&g.target).unwrap();
            assert!(
                detect_layered(&g.model, &xs, y).is_some(),
                "seed {seed} did not detect as layered"
            );
        }
    }

    #[test]
    fn chain_shape_detects_as_tree() {
        for seed in 0..20 {
            let cfg = GeneratorConfig {
                shape: Shape::Chain,
                vars: 5,
                max_domain: 2,
                max_in_degree: 2,
                layer_width: 2,
                seed,
            };
            let g = generate_model(&cfg).unwrap();
            let x = g.model.lookup(&g.cause[0]).unwrap();
            let y = g.model.lookup(&g.target).unwrap();
            assert!(detect_tree(&g.model, x, y).is_some());
        }
    }

    #[test]
    fn zero_vars_rejected() {
        let cfg = GeneratorConfig {
            vars: 0,
            ..GeneratorConfig::default()
        };
        assert!(matches!(
            generate_model(&cfg),
            Err(Error::InfeasibleBounds(_))
        ));
    }
}
