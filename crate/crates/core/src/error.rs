use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("kernel is singular at x = y = {0}")]
    Singularity(f64),
    #[error("invalid truncation radius {t} (grid step {step})")]
    InvalidTruncation { t: f64, step: f64 },
    #[error("grids are not compatible; resample required ({0})")]
    ResampleRequired(String),
    #[error("interval ({lo}, {hi}) leaves the grid window ({window_lo}, {window_hi})")]
    OutOfWindow {
        lo: f64,
        hi: f64,
        window_lo: f64,
        window_hi: f64,
    },
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("witness unavailable: {0}")]
    WitnessUnavailable(String),
    #[error("atom mean {mean:e} exceeds cancellation tolerance {tol:e}")]
    Cancellation { mean: f64, tol: f64 },
    #[error("atom size bound violated: r*max|f| = {0}")]
    AtomSize(f64),
    #[error("degenerate denominator |C g(x0)| = {0:e}")]
    DegenerateDenominator(f64),
    #[error("input is not a two-bump function: {0}")]
    NotTwoBump(String),
    #[error("no contraction: kappa = {kappa} at N = {n}; increase N")]
    NoContraction { kappa: f64, n: u64 },
    #[error("curve: {0}")]
    Curve(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn out_of_window(lo: f64, hi: f64, window_lo: f64, window_hi: f64) -> Self {
        Error::OutOfWindow {
            lo,
            hi,
            window_lo,
            window_hi,
        }
    }
}
