use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("correlation rho = {0} must lie strictly inside (-1, 1)")]
    RhoOutOfRange(f64),

    #[error("delay tau = {0} must be positive")]
    NonPositiveDelay(f64),

    #[error("horizon T = {0} must be positive")]
    NonPositiveHorizon(f64),

    #[error("horizon T = {horizon} is not an integer multiple of the delay tau = {tau}")]
    HorizonNotMultipleOfDelay { horizon: f64, tau: f64 },

    #[error("coarsening factor {factor} does not divide {n_steps} steps")]
    NotDivisible { n_steps: usize, factor: usize },

    #[error("noise does not match mesh: {0}")]
    MeshMismatch(String),

    #[error("time {time} is not aligned with a node of the mesh with step {dt}")]
    Misaligned { time: f64, dt: f64 },

    #[error("non-finite value at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error("fundamental solution drift on delay interval {interval}: running product and exponent sum differ by {relative_gap:e}")]
    PropagatorDrift { interval: usize, relative_gap: f64 },

    #[error("trajectory {trajectory} failed at rho = {rho}, dt = {dt}: {source}")]
    Trajectory {
        rho: f64,
        dt: f64,
        trajectory: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("order fit needs at least two distinct step sizes with positive error, got {0}")]
    TooFewPoints(usize),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::RhoOutOfRange(_) => "rho-out-of-range",
            Error::NonPositiveDelay(_) => "non-positive-delay",
            Error::NonPositiveHorizon(_) => "non-positive-horizon",
            Error::HorizonNotMultipleOfDelay { .. } => "horizon-not-multiple-of-delay",
            Error::NotDivisible { .. } => "not-divisible",
            Error::MeshMismatch(_) => "mesh-mismatch",
            Error::Misaligned { .. } => "misaligned",
            Error::NonFinite { .. } => "non-finite",
            Error::PropagatorDrift { .. } => "propagator-drift",
            Error::Trajectory { .. } => "trajectory-failed",
            Error::EmptyInput(_) => "empty-input",
            Error::TooFewPoints(_) => "too-few-points",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
