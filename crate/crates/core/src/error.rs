use thiserror::Error;

use crate::formula::VarName;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid variable name `{0}`")]
    InvalidVarName(String),
    #[error("missing value for free variable `{0}`")]
    MissingVariable(VarName),
    #[error("formula is not closed; free variables: {0}")]
    NotClosed(String),
    #[error("quantifier nesting deeper than {0} levels")]
    QuantifierDepthExceeded(usize),
    #[error("duplicate variable `{0}` in agent families")]
    DuplicateVariable(VarName),
    #[error("constraint uses variable `{0}` outside the agent families")]
    UnknownVariable(VarName),
    #[error("constraint must be quantifier-free")]
    QuantifiedConstraint,
    #[error("agent count {declared} does not match the {actual} families given")]
    AgentCountMismatch { declared: usize, actual: usize },
    #[error("profile shape does not match the mechanism")]
    ShapeMismatch,
    #[error("profile literal does not cover the mechanism variables: {0}")]
    ProfileMismatch(String),
    #[error("agent {agent} out of range 1..={agents}")]
    AgentOutOfRange { agent: usize, agents: usize },
    #[error("responsibility order must be at least 1")]
    DegreeOutOfRange,
    #[error("{vars} variables exceed the enumeration budget of {budget}")]
    BudgetExceeded { vars: usize, budget: u32 },
    #[error("formula too large: estimated {estimated} nodes exceeds the {limit} node guard")]
    FormulaTooLarge { estimated: u128, limit: u64 },
    #[error("invalid quantifier block structure: {0}")]
    BlockStructure(String),
    #[error("devil strategy undefined at reached node `{0}`")]
    StrategyUndefined(String),
    #[error("devil strategy does not fit the mechanism: {0}")]
    StrategyMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
