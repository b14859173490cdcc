use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unstable system: lambda ({lambda}) must be < r ({r})")]
    UnstableSystem { lambda: f64, r: f64 },
    #[error("invalid capacity: {0}")]
    InvalidCapacity(String),
    #[error("invalid rate: {0}")]
    InvalidRate(String),
    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),
    #[error("average penalty diverges: {0}")]
    PenaltyDiverges(String),
    #[error("moment generating function diverges: alpha ({alpha}) >= minimum term rate ({rate})")]
    MgfDiverges { alpha: f64, rate: f64 },
    #[error("distribution is not integrable: moment {order} evaluates to {value}")]
    NonIntegrable { order: u32, value: f64 },
    #[error("quadrature failed: estimated error {est_error:e} after {evaluations} evaluations")]
    QuadratureFailed { est_error: f64, evaluations: usize },
    #[error("negative average penalty {0}: peak and sojourn distributions are inconsistent")]
    NegativePenalty(f64),
    #[error("penalty {0} is not supported here")]
    UnsupportedPenalty(String),
    #[error("infeasible target: {0}")]
    Infeasible(String),
    #[error("degenerate argument: {0}")]
    DegenerateArgument(String),
    #[error(
        "matrix-geometric iteration did not converge after {iterations} iterations \
         (spectral radius estimate {spectral_radius:.6}, {drift})"
    )]
    NotConverged {
        iterations: usize,
        spectral_radius: f64,
        drift: String,
    },
    #[error("boundary null space has dimension {0}, expected 1")]
    DegenerateNullSpace(usize),
    #[error("singular matrix: {0}")]
    Singular(&'static str),
    #[error("unsupported simulation mode: {0}")]
    ModeUnsupported(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(String),
}
