//! Scaling benchmark on layered chains.
//!
//! For each depth `k`, the harness builds a layered chain of fixed width and
//! binary domains, asks whether the top layer at its actual values is a weak
//! cause of the root's actual value, and times the layered algorithm, the
//! decomposition algorithm on the natural decomposition, and (up to a depth
//! cap and a wall-clock budget) the brute-force oracle. Per-level relation
//! work is bounded by the width and domain sizes, so the layered column
//! grows linearly with `k` while brute force blows up.

use std::time::{Duration, Instant};

use causal_core::decomp::is_weak_cause_decomposed;
use causal_core::error::{Error, Result};
use causal_core::event::Event;
use causal_core::layered::{
    build_layered_relations, decide_on_layering, detect_layered, natural_decomposition,
};
use causal_core::model::{Assignment, CausalModel, ModelBuilder, VarId};
use causal_core::oracle::{is_weak_cause_bruteforce, BruteOptions, CauseQuery};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

/// How mechanism tables are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableStyle {
    /// Seeded uniform random rows.
    SeededRandom,
    /// A fixed per-node pattern (first node of a layer sums its parents
    /// modulo the domain, the others take the maximum), which makes the
    /// per-level relation work identical across depths — the right
    /// instrument for scaling measurements.
    Patterned,
}

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub width: usize,
    /// Domain size for every variable.
    pub domain: usize,
    pub seed: u64,
    pub table_style: TableStyle,
    /// Timing repeats per instance; the median is reported.
    pub repeats: usize,
    /// Brute force runs only for k at or below this.
    pub brute_k_max: usize,
    /// Wall-clock budget per brute-force run; a timeout reports the budget
    /// as a lower bound.
    pub brute_budget: Duration,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            k_min: 2,
            k_max: 30,
            width: 2,
            domain: 2,
            seed: 1,
            table_style: TableStyle::SeededRandom,
            repeats: 5,
            brute_k_max: 15,
            brute_budget: Duration::from_secs(2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub k: usize,
    pub vars: usize,
    pub edges: usize,
    pub decision: bool,
    pub layered_us: f64,
    pub layered_evals: u64,
    pub decomp_us: f64,
    /// Median brute time; `None` when skipped (k above the cap).
    pub brute_us: Option<f64>,
    /// The brute time is the abort budget, i.e. a lower bound.
    pub brute_timed_out: bool,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub schema_version: u32,
    pub config_summary: String,
    pub rows: Vec<BenchRow>,
}

/// A layered chain: `k` layers of exactly `width` variables over a root
/// `Y`, every variable wired to the full layer below, one exogenous input
/// per top-layer variable.
pub fn layered_chain(k: usize, width: usize, domain: usize, seed: u64) -> Result<CausalModel> {
    layered_chain_styled(k, width, domain, seed, TableStyle::SeededRandom)
}

pub fn layered_chain_styled(
    k: usize,
    width: usize,
    domain: usize,
    seed: u64,
    style: TableStyle,
) -> Result<CausalModel> {
    if k == 0 || width == 0 || domain == 0 {
        return Err(Error::InfeasibleBounds(
            "layered chains need positive depth, width, and domain".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols: Vec<String> = (0..domain).map(|i| i.to_string()).collect();
    let mut b = ModelBuilder::new();
    let name = |layer: usize, i: usize| format!("L{:02}N{:02}", layer, i);
    // exogenous drivers for the top layer
    for i in 0..width {
        b = b.exogenous(&format!("U{:02}", i), symbols.clone());
    }
    // declare from the top down
    for layer in (0..=k).rev() {
        let count = if layer == 0 { 1 } else { width };
        for i in 0..count {
            let parents: Vec<String> = if layer == k {
                vec![format!("U{:02}", i)]
            } else {
                (0..width).map(|j| name(layer + 1, j)).collect()
            };
            let rows_count = domain.pow(parents.len() as u32);
            let rows: Vec<String> = match style {
                TableStyle::SeededRandom => (0..rows_count)
                    .map(|_| rng.gen_range(0..domain).to_string())
                    .collect(),
                TableStyle::Patterned => (0..rows_count)
                    .map(|row| {
                        // decode the row into parent values (first parent
                        // slowest) and combine
                        let mut rest = row;
                        let mut vals = vec![0usize; parents.len()];
                        for slot in (0..parents.len()).rev() {
                            vals[slot] = rest % domain;
                            rest /= domain;
                        }
                        let out = if i == 0 {
                            vals.iter().sum::<usize>() % domain
                        } else {
                            *vals.iter().max().unwrap()
                        };
                        out.to_string()
                    })
                    .collect(),
            };
            let parent_refs: Vec<&str> = parents.iter().map(String::as_str).collect();
            b = b.endogenous(&name(layer, i), symbols.clone(), &parent_refs, rows);
        }
    }
    b.build()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

fn micros(d: Duration) -> f64 {
    d.as_secs_f64() * 1e6
}

/// Runs the scaling suite.
pub fn run_layered_chain_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let mut rows = Vec::new();
    for k in cfg.k_min..=cfg.k_max {
        let m = layered_chain_styled(
            k,
            cfg.width,
            cfg.domain,
            cfg.seed.wrapping_add(k as u64),
            cfg.table_style,
        )?;
        let y = m.lookup("L00N00")?;
        let xs: Vec<VarId> = (0..cfg.width)
            .map(|i| m.lookup(&format!("L{:02}N{:02}", k, i)))
            .collect::<Result<_>>()?;
        let u = Assignment::from_pairs(
            m.exogenous_ids()
                .enumerate()
                .map(|(j, id)| (id, causal_core::model::Value(((j + 1) % cfg.domain) as u32))),
        );
        let actual = m.evaluate(&u)?;
        let cause = Assignment::from_pairs(xs.iter().map(|&v| (v, actual.get(v).unwrap())));
        let y_val = actual.get(y).unwrap();
        let edges: usize = m
            .endogenous_ids()
            .map(|v| m.parents(v).len())
            .sum();

        // generous cap: the instance is bounded by construction
        let opts = BruteOptions {
            cap: usize::MAX,
            deadline: None,
        };

        let det = detect_layered(&m, &xs, y).ok_or_else(|| Error::NotApplicable {
            algorithm: "layered".into(),
            reason: "bench instance failed layering detection".into(),
        })?;
        let mut layered_times = Vec::new();
        let mut decision = false;
        for _ in 0..cfg.repeats.max(1) {
            let t0 = Instant::now();
            decision = decide_on_layering(&m, &det.layering, &cause, y, y_val, &u, &opts)?;
            layered_times.push(micros(t0.elapsed()));
        }
        let (_, stats) = build_layered_relations(&m, &det.layering, y_val, &u, &opts)?;
        let layered_evals: u64 = stats.evals_per_level.iter().sum();

        let dec = natural_decomposition(&det.layering);
        let phi = Event::prim(y, y_val);
        let mut decomp_times = Vec::new();
        for _ in 0..cfg.repeats.max(1) {
            let t0 = Instant::now();
            let d = is_weak_cause_decomposed(&m, &cause, &phi, &u, &dec, &opts)?;
            debug_assert_eq!(d, decision);
            decomp_times.push(micros(t0.elapsed()));
        }

        let (brute_us, brute_timed_out) = if k <= cfg.brute_k_max {
            let q = CauseQuery::new(&m, &cause, &u, phi.clone())?;
            let t0 = Instant::now();
            let brute_opts = BruteOptions {
                cap: usize::MAX,
                deadline: Some(t0 + cfg.brute_budget),
            };
            match is_weak_cause_bruteforce(&q, &brute_opts) {
                Ok(out) => {
                    let t = micros(t0.elapsed());
                    assert_eq!(out.is_cause, decision, "brute disagrees at k={k}");
                    (Some(t), false)
                }
                Err(Error::TimedOut) => (Some(micros(cfg.brute_budget)), true),
                Err(e) => return Err(e),
            }
        } else {
            (None, false)
        };

        rows.push(BenchRow {
            k,
            vars: m.endogenous_count(),
            edges,
            decision,
            layered_us: median(layered_times),
            layered_evals,
            decomp_us: median(decomp_times),
            brute_us,
            brute_timed_out,
        });
    }
    Ok(BenchReport {
        schema_version: 1,
        config_summary: format!(
            "layered-chain width={} domain={} k={}..{} seed={}",
            cfg.width, cfg.domain, cfg.k_min, cfg.k_max, cfg.seed
        ),
        rows,
    })
}

impl BenchReport {
    pub fn to_json(&self) -> Json {
        json!({
            "schema_version": self.schema_version,
            "config": self.config_summary,
            "rows": self.rows.iter().map(|r| json!({
                "k": r.k,
                "vars": r.vars,
                "edges": r.edges,
                "decision": r.decision,
                "layered_us": r.layered_us,
                "layered_evals": r.layered_evals,
                "decomp_us": r.decomp_us,
                "brute_us": r.brute_us,
                "brute_timed_out": r.brute_timed_out,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("schema_version,{}\n", self.schema_version);
        out.push_str("k,vars,edges,decision,layered_us,layered_evals,decomp_us,brute_us,brute_timed_out\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.3},{},{:.3},{},{}\n",
                r.k,
                r.vars,
                r.edges,
                r.decision,
                r.layered_us,
                r.layered_evals,
                r.decomp_us,
                r.brute_us.map_or(String::new(), |t| format!("{t:.3}")),
                r.brute_timed_out,
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layered_chain_detects_and_decides() {
        let m = layered_chain(4, 2, 2, 9).unwrap();
        let y = m.lookup("L00N00").unwrap();
        let xs = vec![m.lookup("L04N00").unwrap(), m.lookup("L04N01").unwrap()];
        assert!(detect_layered(&m, &xs, y).is_some());
    }

    #[test]
    fn small_bench_runs() {
        let cfg = BenchConfig {
            k_min: 2,
            k_max: 4,
            repeats: 1,
            brute_k_max: 4,
            brute_budget: Duration::from_millis(500),
            ..Default::default()
        };
        let report = run_layered_chain_bench(&cfg).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.to_csv().starts_with("schema_version,1\n"));
        for r in &report.rows {
            assert!(r.brute_us.is_some());
            assert!(!r.brute_timed_out, "tiny instances should finish");
        }
    }
}
