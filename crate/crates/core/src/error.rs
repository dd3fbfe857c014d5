use thiserror::Error;

/// Errors raised by the solver and its diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported spatial dimension {0} (expected 1 or 2)")]
    UnsupportedDimension(usize),

    #[error("grid size {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),

    #[error("field length {got} does not match grid size {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("profile truncated by the box: boundary mass fraction {fraction:e} exceeds {tolerance:e}")]
    ProfileTruncated { fraction: f64, tolerance: f64 },

    #[error("the damped semigroup is irreversible; negative time {0} rejected")]
    NegativeTime(f64),

    #[error("dense oracle limited to d = 1 and n <= {max}, got d = {d}, n = {n}")]
    OracleTooLarge { d: usize, n: usize, max: usize },

    #[error("kernel quadrature did not stabilise: last two levels differ by {rel_change:e} (tolerance {tolerance:e})")]
    KernelUnstable { rel_change: f64, tolerance: f64 },

    #[error("non-positive time increment {0}")]
    NonPositiveStep(f64),

    #[error("at least {needed} entries required, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("time steps must be strictly decreasing")]
    NotDecreasing,

    #[error("no stored snapshot at t = {0}")]
    MissingSnapshot(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
