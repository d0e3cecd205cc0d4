use thiserror::Error;

use crate::expr::DomainKind;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("undeclared variable '{name}' at position {pos}")]
    UndeclaredVariable { name: String, pos: usize },
    #[error("no value bound for variable '{name}'")]
    UnboundVariable { name: String },
    #[error("{kind} in '{subexpr}'")]
    Domain { kind: DomainKind, subexpr: String },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("singular matrix (pivot {pivot:.3e} in column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("singular d2g block at {point:?}")]
    SingularBlock { point: Vec<f64> },

    #[error("matrix exponential overflowed")]
    Overflow,

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("d2g invertibility violated near {witness:?} (det = {det:.3e}): {reason}")]
    HypothesisViolation {
        witness: Vec<f64>,
        det: f64,
        reason: String,
    },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e}) at {point:?}")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        point: Vec<f64>,
    },

    #[error("trajectory left the box at t = {time} near {point:?}")]
    LeftBox { time: f64, point: Vec<f64> },

    #[error("F vanishes (|F| = {norm:.3e}) on the region boundary near {point:?}")]
    BoundaryZero { point: Vec<f64>, norm: f64 },

    #[error("degenerate zeros prevent a signed count: {points:?}")]
    DegenerateZeros { points: Vec<Vec<f64>> },

    #[error("perturbation votes disagree: {votes:?}")]
    InconsistentVote { votes: Vec<Option<i64>> },

    #[error("shooting Jacobian dP - I is singular at p0 = {point:?} (lambda = {lambda})")]
    SingularShooting { point: Vec<f64>, lambda: f64 },

    #[error("direct degree {direct} disagrees with the reduced formula {reduced}")]
    DegreeMismatch { direct: i64, reduced: i64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown {kind} '{name}'; available: {available}")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}

impl Error {
    /// True for failures of the d2g invertibility hypothesis, the class the CLI
    /// reports with a dedicated exit code.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(self, Error::HypothesisViolation { .. } | Error::SingularBlock { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
