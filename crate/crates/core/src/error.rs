use thiserror::Error;

use crate::lindblad::EvolutionReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator space mismatch: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("unphysical covariance matrix: {0}")]
    UnphysicalCovariance(String),

    #[error("integration failure at t = {time} us: trace drift {trace_drift:.3e} exceeds {threshold:.1e}")]
    IntegrationFailure {
        time: f64,
        trace_drift: f64,
        threshold: f64,
        report: Box<EvolutionReport>,
    },

    #[error(
        "truncation failure at t = {time} us: leakage {leakage:.3e} exceeds {bound:.1e}; raise the Fock cutoffs"
    )]
    TruncationFailure {
        time: f64,
        leakage: f64,
        bound: f64,
        report: Box<EvolutionReport>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in sweep tables.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::SpaceMismatch { .. } => "space-mismatch",
            Error::SingularParameter(_) => "singular-parameter",
            Error::UnphysicalCovariance(_) => "unphysical-covariance",
            Error::IntegrationFailure { .. } => "integration-failure",
            Error::TruncationFailure { .. } => "truncation-failure",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// Solver monitors at the point of failure, if any.
    pub fn report(&self) -> Option<&EvolutionReport> {
        match self {
            Error::IntegrationFailure { report, .. } | Error::TruncationFailure { report, .. } => Some(report),
            _ => None,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
