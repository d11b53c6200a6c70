use thiserror::Error;

/// Which admissible bound of a tranche expected loss a target violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossBound {
    /// Upper bound `f_(0,K]((1-R)p)`, the independence limit (rho -> 0).
    Independence,
    /// Lower bound `p * f_(0,K](1-R)`, the comonotone limit (rho -> 1).
    Comonotone,
}

impl std::fmt::Display for LossBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossBound::Independence => f.write_str("independence (rho -> 0) upper bound"),
            LossBound::Comonotone => f.write_str("comonotone (rho -> 1) lower bound"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("infinite moment: {0}")]
    InfiniteMoment(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("target expected loss {target} violates the {bound} {limit}")]
    OutOfRange {
        target: f64,
        limit: f64,
        bound: LossBound,
    },

    #[error("inconsistent surface: reconstructed probability {value} at K = {k} lies outside [0, 1]")]
    InconsistentSurface { k: f64, value: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
