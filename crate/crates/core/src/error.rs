use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point index {index} out of range for a space with {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid metric measure space: {0}")]
    InvalidSpace(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radii set is empty")]
    EmptyRadii,

    #[error("function is not a valid decreasing rearrangement: {0}")]
    NotRearrangement(String),

    #[error("Luxemburg bracket failure: {0}")]
    BracketFailure(String),

    #[error("value {value} is outside the range of the fundamental function")]
    OutOfRange { value: f64 },

    #[error("gain function `{0}` has no log-domain evaluator")]
    MissingLogDomain(String),

    #[error("series for gain `{0}` diverges")]
    Divergent(String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("no admissible grid points: {0}")]
    EmptyGrid(String),

    #[error("gain `{0}` too weak: no D found satisfying the exponential gain bound")]
    GainTooWeak(String),

    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
}

pub type Result<T> = std::result::Result<T, Error>;
