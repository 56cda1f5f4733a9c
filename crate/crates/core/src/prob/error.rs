use thiserror::Error;

/// Errors raised while building or querying a distribution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("expected {expected} table entries, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("entry {index} has negative probability {value}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("entry {index} is not a finite number")]
    NonFiniteEntry { index: usize },
    #[error("table has zero total mass")]
    ZeroTotalMass,
    #[error("table sums to {sum}, which is not within {tolerance} of 1")]
    NotNormalized { sum: f64, tolerance: f64 },
    #[error("{count} evidence variables exceeds the cap of {cap}")]
    TooManyVariables { count: usize, cap: usize },
    #[error("variable `{0}` is declared more than once")]
    DuplicateVariable(String),
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{0}` is the hypothesis variable, not an evidence variable")]
    NotEvidence(String),
    #[error("`{0}` is not the hypothesis variable")]
    NotHypothesis(String),
    #[error("variable `{0}` appears in both polarities")]
    ConflictingLiteral(String),
    #[error("parameter {name} = {value} is outside the open interval (0, 1)")]
    ParameterOutOfRange { name: String, value: f64 },
    #[error("conditioning on an event of zero mass")]
    ConditioningOnZeroMass,
    #[error("belief {posterior} is degenerate (0 or 1)")]
    DegenerateBelief { posterior: f64 },
    #[error("likelihood ratio {numerator}/{denominator} is not in (0, inf)")]
    UndefinedRatio { numerator: f64, denominator: f64 },
    #[error("malformed model file: {0}")]
    Malformed(String),
}
