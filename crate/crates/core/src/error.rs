use thiserror::Error;

/// Crate-wide error type.
///
/// The CLI maps variants onto its exit-code contract: input and validation
/// problems exit 2, resource caps exit 3, internal invariant violations 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at offset {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("exponent at offset {pos} must be a nonnegative integer constant")]
    BadExponent { pos: usize },
    #[error("exponent overflow: {0}")]
    ExponentOverflow(String),
    #[error("division by an identically zero expression")]
    DivisionByZero,
    #[error("denominator vanishes at the evaluation point: {0}")]
    Pole(String),
    #[error("coordinate `{0}` has no value at the evaluation point")]
    UnboundCoordinate(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("invalid vector field: {0}")]
    InvalidField(String),
    #[error("inconsistent Christoffel data: {0}")]
    InconsistentChristoffel(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("singular base point: pointwise rank {pointwise} below generic rank {generic}")]
    SingularPoint { pointwise: usize, generic: usize },
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),
    #[error("NOT_ADAPTED: {0}")]
    NotAdapted(String),
    #[error("DEPENDENCE_VIOLATION: {0}")]
    DependenceViolation(String),
    #[error("quotient conditions fail: {0}")]
    QuotientConditionsFailed(String),
    #[error("invalid system file: {0}")]
    InvalidFile(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid control signal: {0}")]
    InvalidSignal(String),
    #[error("integration failed at t = {time}: {msg}")]
    Integration { time: f64, msg: String },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
