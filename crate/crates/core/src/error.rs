use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no periodic orbit: a = {a} does not exceed a_* = {a_star} for p = {p}")]
    NoPeriodicOrbit { p: f64, a: f64, a_star: f64 },

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("({n}, {m}) is not admissible: need gcd(n, m) = 1 and m < 2n < sqrt(2) m")]
    Inadmissible { n: u32, m: u32 },

    #[error("closure target 2*pi*{q} is within 1e-6 of sqrt(2)*pi; the limit is approached, not attained")]
    NearCircularTarget { q: f64 },

    #[error("no closure solution: {0}")]
    NotFound(String),

    #[error("integrator step failure at s = {s}: step {step} below minimum")]
    StepFailure { s: f64, step: f64 },

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("insufficient resolution: {per_period} samples per period, need at least {required}")]
    Resolution { per_period: usize, required: usize },

    #[error("seed is not in the fiber over the base point (deviation {deviation:e})")]
    Seed { deviation: f64 },

    #[error("closing the horizontal lift needs more than {max} covers")]
    CoverOverflow { max: u32 },

    #[error("vertex {index} lies within 1e-6 of the projection pole")]
    PoleCollision { index: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
