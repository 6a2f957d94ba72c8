use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical routines.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("support value {value} at index {index} is not strictly positive and finite")]
    NonPositiveSupport { index: usize, value: f64 },
    #[error("weight {value} at index {index} is negative or not finite")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1")]
    WeightSumMismatch { sum: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown Orlicz function `{0}`")]
    UnknownFunction(String),
    #[error("parameter {name} = {value} out of range ({expected})")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("argument {0} outside the domain of the principal Lambert W branch (>= -1/e)")]
    DomainError(f64),
    #[error("scale k = {0} must be strictly positive")]
    NonPositiveK(f64),
    #[error("candidate x = {0} must be strictly positive")]
    NonPositiveX(f64),
    #[error("forecast and outcome must be strictly positive (x = {x}, y = {y})")]
    NonPositiveArgs { x: f64, y: f64 },
    #[error("no sign change on bracket [{lo:e}, {hi:e}]: E[phi] = {at_lo} at lo, {at_hi} at hi")]
    BracketFailure {
        lo: f64,
        hi: f64,
        at_lo: f64,
        at_hi: f64,
    },
    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("expected score not minimized at the premium: {detail} (x = {x})")]
    ConsistencyViolation { x: f64, detail: String },
    #[error("{property} violated: {witness}")]
    PropertyViolation {
        property: &'static str,
        witness: String,
    },
    #[error("inner risk functional failed: {0}")]
    InnerEvaluationFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical method on otherwise valid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BracketFailure { .. }
                | Error::NonConvergence { .. }
                | Error::QuadratureFailure(_)
                | Error::ConsistencyViolation { .. }
                | Error::PropertyViolation { .. }
                | Error::InnerEvaluationFailure(_)
        )
    }
}
