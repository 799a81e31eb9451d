//! Deciding causes and explanations in recursive structural causal models.
//!
//! The crate provides:
//!
//! - finite-domain causal models with contexts, interventions, and events
//!   ([`model`], [`event`], [`graph`]);
//! - a brute-force, definition-level oracle for weak and actual causes
//!   ([`oracle`]);
//! - irrelevant-variable reduction of causes and models ([`reduction`]);
//! - polynomial-time weak-cause decisions for causal trees ([`tree`]),
//!   decomposable causal graphs ([`decomp`]), and layered causal graphs
//!   ([`layered`]);
//! - explanations, partial explanations, and explanatory power over any of
//!   those backends ([`explain`]);
//! - file codecs, a seeded model generator, and algorithm auto-selection
//!   ([`codec`], [`generate`], [`dispatch`]).
//!
//! Everything is a pure function of immutable inputs; all values are safe to
//! share across threads.

pub mod error;
pub mod model;
pub mod event;
pub mod graph;
pub mod fixtures;
pub(crate) mod iterate;
pub mod oracle;
pub mod reduction;
pub mod tree;
pub mod decomp;
pub mod layered;
pub mod explain;
pub mod codec;
pub mod generate;
pub mod dispatch;

pub use decomp::{
    build_triple_relations, is_weak_cause_decomposed, trivial_decomposition,
    validate_decomposition, Decomposition, Triple, TripleRelation,
};
pub use dispatch::{
    decide_actual_cause, decide_weak_cause, AlgoBackend, Algorithm, Decision, DecisionOptions,
    ReductionSummary,
};
pub use error::{Error, Result};
pub use event::{parse_event, Event};
pub use explain::{
    explanatory_power, is_alpha_partial, is_explanation, is_partial, largest_explaining_subset,
    ContextSet, ExplanationVerdict, FailedCondition, WeakCauseBackend,
};
pub use generate::{generate_model, GeneratedModel, GeneratorConfig, Shape};
pub use graph::{causal_graph, restrict_to_endogenous, CausalGraph, OpCounters};
pub use layered::{
    build_layered_relations, detect_layered, is_weak_cause_layered, natural_decomposition,
    Layering,
};
pub use model::{
    merge, Assignment, CausalModel, Domain, Evaluator, Mechanism, ModelBuilder, Value, VarId,
    VarKind, Variable,
};
pub use oracle::{
    enumerate_causes, is_actual_cause, is_weak_cause, is_weak_cause_bruteforce, BruteOptions,
    CauseMode, CauseQuery, Witness,
};
pub use reduction::{
    classify_relevance, reduce_model, relevant_graph, strip_blocked, strip_nonancestors,
    ReducedModel, RelevanceClass, RelevanceClassification,
};
pub use tree::{build_tree_relations, detect_tree, is_weak_cause_tree, TreePath, TreeRelation};
