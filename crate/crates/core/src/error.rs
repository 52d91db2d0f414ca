use thiserror::Error;

/// Errors raised by the solver core.
#[derive(Debug, Error)]
pub enum MhdError {
    #[error("grid mismatch: expected {expected:?}, found {found:?}")]
    GridMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid grid {nx}x{ny}: each axis needs at least 4 cells")]
    InvalidGrid { nx: usize, ny: usize },
    #[error("requested {requested} modes but only {available} are available")]
    Capacity { requested: usize, available: usize },
    #[error("eigensolver did not converge: residuals {residuals:?}")]
    EigenNonConvergence { residuals: Vec<f64> },
    #[error(
        "linear solver `{solver}` stalled after {iterations} iterations (residual {residual:e})"
    )]
    LinearSolver {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("unsupported Sobolev exponent {0}")]
    UnsupportedExponent(f64),
    #[error("boundary trace: {0}")]
    Trace(String),
    #[error("incompatible initial data: {0}")]
    Compatibility(String),
    #[error("Picard iteration failed to contract at t={t}: ratio {ratio:.3} after {iterations} iterations; reduce dt")]
    PicardDivergence {
        t: f64,
        ratio: f64,
        iterations: usize,
    },
    #[error("outer coupling did not converge at t={t}: iterate history {history:?}")]
    OuterDivergence { t: f64, history: Vec<f64> },
    #[error("step failed at t={t}: {source}")]
    StepFailure {
        t: f64,
        #[source]
        source: Box<MhdError>,
    },
    #[error("undefined ratio: {0}")]
    UndefinedRatio(&'static str),
    #[error("inconsistent estimate: {0}")]
    Inconsistent(String),
    #[error("file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, MhdError>;
