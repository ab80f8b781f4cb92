use thiserror::Error;

pub type Result<T> = std::result::Result<T, WaveError>;

/// Every failure the library can report.
///
/// [`WaveError::code`] gives a stable machine-readable tag that the CLI
/// prints in front of the message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("cubic has repeated roots (discriminant {discriminant:e})")]
    DegenerateRoots { discriminant: f64 },

    #[error("contract violated: {0}")]
    ContractViolation(String),

    #[error("t = {time} is too close to the asymptote at t = {nearest}")]
    AsymptoteProximity { time: f64, nearest: f64 },

    #[error("no stagnation solution in [{z_min}, {z_max}]; widen the interval")]
    EmptyReport { z_min: f64, z_max: f64 },

    #[error("step size underflow at t = {t}")]
    Stiffness { t: f64, state: Vec<f64> },
}

impl WaveError {
    pub fn code(&self) -> &'static str {
        match self {
            WaveError::Domain(_) => "E_DOMAIN",
            WaveError::DegenerateRoots { .. } => "E_DEGENERATE_ROOTS",
            WaveError::ContractViolation(_) => "E_CONTRACT",
            WaveError::AsymptoteProximity { .. } => "E_ASYMPTOTE",
            WaveError::EmptyReport { .. } => "E_EMPTY_REPORT",
            WaveError::Stiffness { .. } => "E_STIFFNESS",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        WaveError::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        WaveError::ContractViolation(msg.into())
    }
}
