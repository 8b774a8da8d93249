//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: lo ({lo}) must be strictly below hi ({hi})")]
    InvalidDomain { lo: f64, hi: f64 },

    #[error("knot vector must be non-decreasing (violation at index {index})")]
    UnsortedKnots { index: usize },

    #[error("knot vector has {len} knots, need at least order + 1 = {min}")]
    TooFewKnots { len: usize, min: usize },

    #[error("polynomial degree must be at least 1, got {0}")]
    InvalidDegree(usize),

    #[error("spline order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error("window index {index} out of range for a basis of {count} windows")]
    WindowIndexOutOfRange { index: usize, count: usize },

    #[error("basis parameter {t} outside [0, 1]")]
    ParamOutOfRange { t: f64 },

    #[error("samples must be sorted non-decreasing (violation at index {index})")]
    UnsortedSamples { index: usize },

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("degenerate basis: no window with positive area (data width {width})")]
    DegenerateBasis { width: f64 },

    #[error("{count} sample(s) covered by no window (first uncovered index {first})")]
    CoverageFailure { count: usize, first: usize },

    #[error("design matrix column {sample} is zero: sample covered only by zero-weighted windows")]
    ZeroColumn { sample: usize },

    #[error("gram matrix diagonal entry {index} is zero")]
    ZeroDiagonal { index: usize },

    #[error(
        "inner solver stopped at residual {residual:e} (target {delta:e}) after {updates} updates"
    )]
    InnerNonConvergence {
        residual: f64,
        delta: f64,
        updates: u64,
    },

    #[error("outer iteration {outer}: {cause}")]
    SolverFailed {
        outer: usize,
        #[source]
        cause: Box<Error>,
        /// Iteration record up to the failure, for diagnostics.
        report: Box<crate::solver::FitReport>,
    },

    #[error("total mass collapsed to zero during rescale (coverage failure)")]
    MassCollapse,

    #[error("no closed-form density available for source `{0}`")]
    NoTruth(&'static str),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("sample file: {0}")]
    DataFormat(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad arguments rather than bad data or a
    /// failed solve; the CLI maps these to the usage exit code.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidDegree(_)
                | Error::InvalidOrder(_)
                | Error::InvalidConfig(_)
                | Error::TooFewSamples { .. }
        )
    }

    /// True when a fit failed to converge; the CLI maps these to their own
    /// exit code.
    pub fn is_nonconvergence(&self) -> bool {
        match self {
            Error::InnerNonConvergence { .. } => true,
            Error::SolverFailed { cause, .. } => cause.is_nonconvergence(),
            _ => false,
        }
    }
}
