//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by model construction, evaluation, and the decision
/// procedures.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),

    #[error("variable `{var}` lists value `{value}` more than once")]
    DuplicateValue { var: String, value: String },

    #[error("value `{value}` is not in the domain of `{var}`")]
    ValueOutOfDomain { var: String, value: String },

    #[error("variable `{child}` lists unknown parent `{parent}`")]
    UnknownParent { child: String, parent: String },

    #[error("variable `{child}` lists parent `{parent}` more than once")]
    DuplicateParent { child: String, parent: String },

    #[error("endogenous variable `{0}` may not be its own parent")]
    SelfParent(String),

    #[error("mechanism table for `{var}` is missing an entry for parents = ({combo})")]
    NonTotalTable { var: String, combo: String },

    #[error("mechanism table for `{var}` has {got} entries, expected {expected}")]
    TableSizeMismatch { var: String, got: usize, expected: usize },

    #[error("model is not recursive: cycle through {0}")]
    NotRecursive(String),

    #[error("context does not bind exogenous variable `{0}`")]
    UnboundExogenous(String),

    #[error("context binds `{0}`, which is not exogenous")]
    ContextBindsEndogenous(String),

    #[error("exogenous variable `{0}` may not have a mechanism")]
    ExogenousWithMechanism(String),

    #[error("intervention binds `{0}`, which is not endogenous")]
    InterventionOnExogenous(String),

    #[error("event syntax error at offset {position}: {message}")]
    EventSyntax { position: usize, message: String },

    #[error("event mentions `{0}`, which is exogenous; events range over endogenous variables")]
    EventOverExogenous(String),

    #[error("mechanism expression for `{var}`: {message}")]
    MechanismExpr { var: String, message: String },

    #[error("a cause must bind at least one variable")]
    EmptyCauseSet,

    #[error("cause variable `{0}` is not endogenous")]
    CauseNotEndogenous(String),

    #[error("search space too large: |V \\ X| = {size} exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("search aborted: time budget exhausted")]
    TimedOut,

    #[error("{algorithm} is not applicable here: {reason}")]
    NotApplicable { algorithm: String, reason: String },

    #[error("invalid decomposition: {condition} violated ({detail})")]
    InvalidDecomposition { condition: String, detail: String },

    #[error("context set is empty")]
    EmptyContextSet,

    #[error("explanation precondition violated: {0}")]
    ExplainPrecondition(String),

    #[error("explanatory power is undefined: no context in C satisfies X(u) = x")]
    UndefinedDenominator,

    #[error("largest explaining subset is undefined: X = x is an explanation relative to no subset of C")]
    UndefinedSubset,

    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("cannot materialize mechanism for `{var}`: table over {entries} exogenous entries exceeds the budget of {budget}")]
    TableBudgetExceeded { var: String, entries: u128, budget: u64 },

    #[error("generator bounds are infeasible: {0}")]
    InfeasibleBounds(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
