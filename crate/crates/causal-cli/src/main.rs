//! `causal` — decide weak causes, actual causes, and explanations in
//! recursive structural causal models.
//!
//! Reports are single JSON documents on stdout; traces go to stderr. Exit
//! codes: 0 a decision was rendered, 2 usage error, 3 a requested algorithm
//! is not applicable (and no fallback was permitted), 4 a search guardrail
//! (cap or time budget) fired.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde_json::{json, Value as Json};

use causal_core::codec;
use causal_core::decomp::validate_decomposition;
use causal_core::dispatch::{
    decide_actual_cause, decide_weak_cause, AlgoBackend, Algorithm, Decision, DecisionOptions,
};
use causal_core::error::Error;
use causal_core::event::parse_event;
use causal_core::explain::{
    explanatory_power, is_explanation, largest_explaining_subset, FailedCondition,
    WeakCauseBackend,
};
use causal_core::generate::{generate_model, GeneratorConfig, Shape};
use causal_core::layered::detect_layered;
use causal_core::model::{Assignment, CausalModel, VarId};
use causal_core::oracle::{BruteOptions, Witness};
use causal_core::reduction::{classify_relevance, reduce_model, RelevanceClass};
use causal_core::tree::detect_tree;
use causal_core::trivial_decomposition;
use causal_cli::bench::{run_layered_chain_bench, BenchConfig};

#[derive(Parser)]
#[command(
    name = "causal",
    version,
    about = "Causes and explanations in structural causal models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the model under a context, optionally intervened.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        /// Context bindings, e.g. "U1=1,U2=0".
        #[arg(long)]
        context: String,
        /// Optional intervention bindings, e.g. "A1=0".
        #[arg(long)]
        intervene: Option<String>,
    },
    /// Decide whether CAUSE is a weak cause of EVENT under CONTEXT.
    WeakCause(QueryArgs),
    /// Decide whether CAUSE is an actual cause (singleton weak cause).
    ActualCause(QueryArgs),
    /// Decide whether CAUSE explains EVENT relative to a context set.
    Explanation(ExplainArgs),
    /// α-partial explanations and explanatory power.
    PartialExplanation {
        #[command(flatten)]
        common: ExplainArgs,
        /// Threshold as an exact rational, e.g. "1/2".
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Remove irrelevant variables and emit the reduced model.
    Reduce {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cause: String,
        #[arg(long)]
        event: String,
        /// Where to write the reduced model (JSON).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Report tree/layered detection and the trivial decomposition.
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cause: String,
        #[arg(long)]
        event: String,
    },
    /// Validate a decomposition file against D1–D6.
    DecomposeValidate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cause: String,
        #[arg(long)]
        event: String,
        #[arg(long)]
        decomposition: PathBuf,
    },
    /// Generate a seeded random model.
    Generate {
        /// chain | tree | layered | random-dag
        #[arg(long)]
        shape: String,
        #[arg(long)]
        vars: usize,
        #[arg(long, default_value_t = 2)]
        max_domain: usize,
        #[arg(long, default_value_t = 3)]
        max_in_degree: usize,
        #[arg(long, default_value_t = 2)]
        layer_width: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Scaling benchmark on layered chains.
    Bench {
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 30)]
        k_max: usize,
        #[arg(long, default_value_t = 2)]
        width: usize,
        #[arg(long, default_value_t = 2)]
        domain: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Run brute force only up to this depth.
        #[arg(long, default_value_t = 15)]
        brute_k_max: usize,
        /// Per-run brute-force budget in milliseconds.
        #[arg(long, default_value_t = 2000)]
        brute_budget_ms: u64,
        /// csv | json
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    model: PathBuf,
    /// Cause bindings, e.g. "A1=1" or "A1=1,A2=1".
    #[arg(long)]
    cause: String,
    /// Event formula, e.g. "B=1" or "!(A1=1 & B=0)".
    #[arg(long)]
    event: String,
    /// Context bindings over the exogenous variables.
    #[arg(long)]
    context: String,
    /// auto | brute | tree | layered | decomp
    #[arg(long, default_value = "auto")]
    algorithm: String,
    /// Decomposition file (required with --algorithm decomp).
    #[arg(long)]
    decomposition: Option<PathBuf>,
    /// Search for and report an AC2 witness (routes through the oracle).
    #[arg(long)]
    witness: bool,
    /// Dump per-level relations to stderr.
    #[arg(long)]
    trace: bool,
    /// Guardrail on the brute-force search space |V \ X|.
    #[arg(long, default_value_t = 20)]
    cap: usize,
    /// Skip specialized algorithms whose detected width/in-degree exceeds
    /// this.
    #[arg(long)]
    width_bound: Option<usize>,
    /// Skip specialized algorithms when some relevant domain exceeds this.
    #[arg(long)]
    domain_bound: Option<usize>,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    cause: String,
    #[arg(long)]
    event: String,
    /// Context-set file (JSON array of {"u": {...}, "p": "num/den"}).
    #[arg(long)]
    contexts: PathBuf,
    /// auto | brute | tree | layered | decomp
    #[arg(long, default_value = "auto")]
    algorithm: String,
    #[arg(long)]
    decomposition: Option<PathBuf>,
    /// Fail instead of falling back to the oracle when the chosen
    /// algorithm does not apply to a subquery.
    #[arg(long)]
    no_fallback: bool,
    #[arg(long, default_value_t = 20)]
    cap: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotApplicable { .. } => 3,
        Error::CapExceeded { .. } | Error::TimedOut => 4,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<Json, Error> {
    match cli.command {
        Command::Evaluate {
            model,
            context,
            intervene,
        } => {
            let m = codec::load_model(&model)?;
            let u = m.parse_bindings(&context)?;
            let x = match intervene {
                Some(text) => m.parse_bindings(&text)?,
                None => Assignment::new(),
            };
            let targets: Vec<VarId> = m.endogenous_ids().collect();
            let out = m.eval_intervened(&x, &u, &targets)?;
            Ok(json!({ "values": bindings_json(&m, &out) }))
        }
        Command::WeakCause(args) => query_command(args, false),
        Command::ActualCause(args) => query_command(args, true),
        Command::Explanation(args) => {
            let started = Instant::now();
            let (m, cause, phi, c, backend) = explain_setup(&args)?;
            let verdict = is_explanation(&m, &cause, &phi, &c, backend.as_ref())?;
            Ok(json!({
                "is_explanation": verdict.is_explanation,
                "failed_condition": verdict.failed.as_ref().map(failed_condition_json(&m, &c)),
                "algorithm": backend.name(),
                "elapsed_ms": ms(started),
            }))
        }
        Command::PartialExplanation { common, alpha } => {
            let started = Instant::now();
            let (m, cause, phi, c, backend) = explain_setup(&common)?;
            let alpha_val = alpha
                .map(|a| {
                    codec::rational_from_json(&Json::String(a), "/alpha")
                })
                .transpose()?;
            let subset = largest_explaining_subset(&m, &cause, &phi, &c, backend.as_ref())?;
            let mut report = json!({
                "algorithm": backend.name(),
                "subset_defined": subset.is_some(),
                "alpha": alpha_val.as_ref().map(codec::rational_to_string),
            });
            let obj = report.as_object_mut().expect("object");
            match subset {
                None => {
                    obj.insert("is_partial".into(), json!(false));
                    obj.insert("is_alpha_partial".into(), json!(false));
                    obj.insert("explanatory_power".into(), Json::Null);
                    obj.insert("largest_subset".into(), Json::Null);
                }
                Some(sub) => {
                    obj.insert(
                        "largest_subset".into(),
                        codec::context_set_to_json(&m, &sub),
                    );
                    match explanatory_power(&m, &cause, &phi, &c, backend.as_ref()) {
                        Ok(outcome) => {
                            obj.insert(
                                "explanatory_power".into(),
                                json!(codec::rational_to_string(&outcome.power)),
                            );
                            obj.insert(
                                "is_partial".into(),
                                json!(outcome.power > BigRational::new(0.into(), 1.into())),
                            );
                            if let Some(a) = &alpha_val {
                                obj.insert(
                                    "is_alpha_partial".into(),
                                    json!(outcome.power >= *a),
                                );
                            }
                        }
                        Err(Error::UndefinedDenominator) => {
                            obj.insert("explanatory_power".into(), Json::Null);
                            obj.insert("undefined_denominator".into(), json!(true));
                            obj.insert("is_partial".into(), json!(false));
                            obj.insert("is_alpha_partial".into(), json!(false));
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            obj.insert("elapsed_ms".into(), json!(ms(started)));
            Ok(report)
        }
        Command::Reduce {
            model,
            cause,
            event,
            output,
        } => {
            let m = codec::load_model(&model)?;
            let x = m.parse_bindings(&cause)?;
            let phi = parse_event(&m, &event)?;
            let cause_vars: Vec<VarId> = x.vars().collect();
            let red = reduce_model(
                &m,
                &cause_vars,
                &phi,
                causal_core::reduction::DEFAULT_TABLE_BUDGET,
            )?;
            let classes: Json = m
                .endogenous_ids()
                .map(|v| {
                    let label = match red.classification.class(v) {
                        RelevanceClass::ClassI => "I",
                        RelevanceClass::ClassII => "II",
                        RelevanceClass::ClassIII => "III",
                        RelevanceClass::Irrelevant => "irrelevant",
                    };
                    (m.name(v).to_string(), json!(label))
                })
                .collect::<serde_json::Map<String, Json>>()
                .into();
            let model_json = codec::model_to_json(&red.model)?;
            if let Some(path) = &output {
                std::fs::write(path, serde_json::to_string_pretty(&model_json)? + "\n")?;
            }
            Ok(json!({
                "classification": classes,
                "relevant": m.endogenous_ids()
                    .filter(|&v| red.classification.is_relevant(v))
                    .map(|v| m.name(v)).collect::<Vec<_>>(),
                "dropped": m.endogenous_ids()
                    .filter(|&v| !red.classification.is_relevant(v))
                    .map(|v| m.name(v)).collect::<Vec<_>>(),
                "reduced_model": match &output {
                    Some(p) => json!(p.display().to_string()),
                    None => model_json,
                },
            }))
        }
        Command::Detect {
            model,
            cause,
            event,
        } => {
            let m = codec::load_model(&model)?;
            let x = m.parse_bindings(&cause)?;
            let phi = parse_event(&m, &event)?;
            let cause_vars: Vec<VarId> = x.vars().collect();
            let tree_report = match (cause_vars.as_slice(), phi.as_primitive()) {
                (&[xv], Some((yv, _))) => detect_tree(&m, xv, yv).map(|det| {
                    json!({
                        "path": det.path.nodes.iter().rev().map(|&v| m.name(v)).collect::<Vec<_>>(),
                        "siblings": det.path.siblings.iter().skip(1)
                            .map(|s| s.iter().map(|&v| m.name(v)).collect::<Vec<_>>())
                            .collect::<Vec<_>>(),
                        "max_in_degree": det.max_in_degree,
                    })
                }),
                _ => None,
            };
            let layered_report = phi.as_primitive().and_then(|(yv, _)| {
                detect_layered(&m, &cause_vars, yv).map(|det| {
                    json!({
                        "layers": det.layering.layers.iter()
                            .map(|l| l.iter().map(|&v| m.name(v)).collect::<Vec<_>>())
                            .collect::<Vec<_>>(),
                        "width": det.width,
                    })
                })
            });
            let red = reduce_model(
                &m,
                &cause_vars,
                &phi,
                causal_core::reduction::DEFAULT_TABLE_BUDGET,
            )?;
            let cause_r: Vec<VarId> = cause_vars
                .iter()
                .map(|&v| red.map(v).expect("cause is relevant"))
                .collect();
            let phi_r = red.map_event(&phi, &m)?;
            let trivial = trivial_decomposition(&red, &cause_r, &phi_r)
                .map(|dec| codec::decomposition_to_json(&red.model, &dec));
            Ok(json!({
                "tree": tree_report,
                "layered": layered_report,
                "trivial_decomposition": trivial,
            }))
        }
        Command::DecomposeValidate {
            model,
            cause,
            event,
            decomposition,
        } => {
            let m = codec::load_model(&model)?;
            let x = m.parse_bindings(&cause)?;
            let phi = parse_event(&m, &event)?;
            let dec = codec::load_decomposition(&m, &decomposition)?;
            let cause_vars: Vec<VarId> = x.vars().collect();
            let report = validate_decomposition(&m, &cause_vars, &phi, &dec)?;
            Ok(json!({
                "valid": report.valid,
                "condition": report.violation.as_ref().map(|v| v.condition.to_string()),
                "detail": report.violation.as_ref().map(|v| v.detail.clone()),
                "offenders": report.violation.as_ref().map(|v| {
                    v.offenders.iter().map(|&o| m.name(o)).collect::<Vec<_>>()
                }),
                "max_block": report.max_block,
            }))
        }
        Command::Generate {
            shape,
            vars,
            max_domain,
            max_in_degree,
            layer_width,
            seed,
            output,
        } => {
            let cfg = GeneratorConfig {
                shape: shape.parse::<Shape>()?,
                vars,
                max_domain,
                max_in_degree,
                layer_width,
                seed,
            };
            let g = generate_model(&cfg)?;
            codec::save_model(&g.model, &output)?;
            Ok(json!({
                "model": output.display().to_string(),
                "cause": g.cause,
                "target": g.target,
                "vars": g.model.endogenous_count(),
                "seed": seed,
            }))
        }
        Command::Bench {
            k_min,
            k_max,
            width,
            domain,
            seed,
            repeats,
            brute_k_max,
            brute_budget_ms,
            format,
            output,
        } => {
            let cfg = BenchConfig {
                k_min,
                k_max,
                width,
                domain,
                seed,
                repeats,
                brute_k_max,
                brute_budget: Duration::from_millis(brute_budget_ms),
            };
            let report = run_layered_chain_bench(&cfg)?;
            match format.as_str() {
                "csv" => {
                    let text = report.to_csv();
                    if let Some(path) = &output {
                        std::fs::write(path, &text)?;
                        Ok(json!({ "written": path.display().to_string(), "rows": report.rows.len() }))
                    } else {
                        print!("{text}");
                        Ok(json!({ "rows": report.rows.len() }))
                    }
                }
                "json" => {
                    let j = report.to_json();
                    if let Some(path) = &output {
                        std::fs::write(path, serde_json::to_string_pretty(&j)? + "\n")?;
                        Ok(json!({ "written": path.display().to_string(), "rows": report.rows.len() }))
                    } else {
                        Ok(j)
                    }
                }
                other => Err(Error::InfeasibleBounds(format!(
                    "unknown format `{other}` (csv|json)"
                ))),
            }
        }
    }
}

fn ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1e3
}

fn bindings_json(m: &CausalModel, a: &Assignment) -> Json {
    a.iter()
        .map(|(var, val)| {
            (
                m.name(var).to_string(),
                json!(m.domain(var).symbol(val)),
            )
        })
        .collect::<serde_json::Map<String, Json>>()
        .into()
}

fn witness_json(m: &CausalModel, w: &Witness) -> Json {
    json!({
        "W": w.contingency_vars.iter().map(|&v| m.name(v)).collect::<Vec<_>>(),
        "x_bar": bindings_json(m, &w.alt_cause),
        "w": bindings_json(m, &w.contingency),
    })
}

fn query_command(args: QueryArgs, actual: bool) -> Result<Json, Error> {
    let started = Instant::now();
    let m = codec::load_model(&args.model)?;
    let cause = m.parse_bindings(&args.cause)?;
    let phi = parse_event(&m, &args.event)?;
    let u = m.parse_bindings(&args.context)?;
    let algorithm = args.algorithm.parse::<Algorithm>()?;
    if algorithm == Algorithm::Decomp && args.decomposition.is_none() {
        // usage error: decomp needs its input file
        return Err(Error::Json(
            "--algorithm decomp requires --decomposition".into(),
        ));
    }
    let decomposition = args
        .decomposition
        .as_ref()
        .map(|p| codec::load_decomposition(&m, p))
        .transpose()?;
    let opts = DecisionOptions {
        algorithm: Some(algorithm),
        decomposition,
        brute: BruteOptions {
            cap: args.cap,
            deadline: None,
        },
        want_witness: args.witness,
        want_trace: args.trace,
        width_bound: args.width_bound,
        domain_bound: args.domain_bound,
    };
    let decision: Decision = if actual {
        decide_actual_cause(&m, &cause, &phi, &u, &opts)?
    } else {
        decide_weak_cause(&m, &cause, &phi, &u, &opts)?
    };
    if let Some(trace) = &decision.trace {
        eprintln!("{}", serde_json::to_string_pretty(trace).expect("trace"));
    }
    Ok(json!({
        "decision": decision.holds,
        "algorithm": decision.algorithm_used,
        "witness": decision.witness.as_ref().map(|w| witness_json(&m, w)),
        "reduction": decision.reduction.as_ref().map(|r| json!({
            "stripped_nonancestors": r.stripped_nonancestors,
            "stripped_blocked": r.stripped_blocked,
            "flagged": r.strip_flagged,
            "relevant": r.relevant,
            "dropped": r.dropped,
        })),
        "elapsed_ms": ms(started),
    }))
}

type ExplainParts = (
    CausalModel,
    Assignment,
    causal_core::event::Event,
    causal_core::explain::ContextSet,
    Box<dyn WeakCauseBackend>,
);

fn explain_setup(args: &ExplainArgs) -> Result<ExplainParts, Error> {
    let m = codec::load_model(&args.model)?;
    let cause = m.parse_bindings(&args.cause)?;
    let phi = parse_event(&m, &args.event)?;
    let c = codec::load_context_set(&m, &args.contexts)?;
    let algorithm = args.algorithm.parse::<Algorithm>()?;
    let decomposition = args
        .decomposition
        .as_ref()
        .map(|p| codec::load_decomposition(&m, p))
        .transpose()?;
    let backend = AlgoBackend {
        algorithm,
        decomposition,
        brute: BruteOptions {
            cap: args.cap,
            deadline: None,
        },
        allow_fallback: !args.no_fallback,
    };
    Ok((m, cause, phi, c, Box::new(backend)))
}

fn failed_condition_json<'a>(
    m: &'a CausalModel,
    c: &'a causal_core::explain::ContextSet,
) -> impl Fn(&FailedCondition) -> Json + 'a {
    move |f: &FailedCondition| match f {
        FailedCondition::Ex1 { context_index } => json!({
            "condition": "EX1",
            "context": bindings_json(m, &c.contexts()[*context_index]),
        }),
        FailedCondition::Ex2 { context_index } => json!({
            "condition": "EX2",
            "context": bindings_json(m, &c.contexts()[*context_index]),
        }),
        FailedCondition::Ex3 { subset } => json!({
            "condition": "EX3",
            "subset": subset.iter().map(|&v| m.name(v)).collect::<Vec<_>>(),
        }),
        FailedCondition::Ex4 => json!({ "condition": "EX4" }),
    }
}
