use std::fmt;

use ehaoi_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_DIVERGES: u8 = 3;
pub const EXIT_UNSUPPORTED: u8 = 4;
pub const EXIT_NOT_CONVERGED: u8 = 5;

/// A command failure carrying its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    pub fn unsupported(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_UNSUPPORTED,
            message: message.into(),
        }
    }

    pub fn io(e: impl fmt::Display) -> Self {
        Failure {
            code: EXIT_FAILED,
            message: format!("i/o error: {e}"),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnstableSystem { .. }
        | Error::InvalidCapacity(_)
        | Error::InvalidRate(_)
        | Error::InvalidPenalty(_)
        | Error::InvalidConfig(_)
        | Error::Infeasible(_)
        | Error::DegenerateArgument(_) => EXIT_INVALID,
        Error::PenaltyDiverges(_) | Error::MgfDiverges { .. } | Error::NonIntegrable { .. } => {
            EXIT_DIVERGES
        }
        Error::UnsupportedPenalty(_) | Error::ModeUnsupported(_) => EXIT_UNSUPPORTED,
        Error::NotConverged { .. }
        | Error::DegenerateNullSpace(_)
        | Error::Singular(_)
        | Error::QuadratureFailed { .. }
        | Error::NegativePenalty(_) => EXIT_NOT_CONVERGED,
        Error::Io(_) => EXIT_FAILED,
    }
}

/// Whether a per-point error in a sweep means the metric is infinite.
pub fn is_divergence(e: &Error) -> bool {
    exit_code(e) == EXIT_DIVERGES
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}
