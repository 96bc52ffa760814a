use thiserror::Error;

use nwheat::derivatives::DerivativeError;
use nwheat::diagnostics::DiagnosticsError;
use nwheat::numerics::NumericsError;
use nwheat::solutions::SolutionError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Compute(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad input, 1 for a computation that could not be certified.
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Domain(_) => 2,
            CliError::Compute(_) | CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::Domain(_) | NumericsError::PrecisionOutOfRange { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

impl From<SolutionError> for CliError {
    fn from(e: SolutionError) -> Self {
        match e {
            SolutionError::Numerics(n) => n.into(),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<DerivativeError> for CliError {
    fn from(e: DerivativeError) -> Self {
        match e {
            DerivativeError::OrderCap { .. } => CliError::Domain(e.to_string()),
            DerivativeError::Solution(s) => s.into(),
            DerivativeError::Numerics(n) => n.into(),
        }
    }
}

impl From<DiagnosticsError> for CliError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Precondition(_) => CliError::Domain(e.to_string()),
            DiagnosticsError::Undecidable(_) => CliError::Compute(e.to_string()),
            DiagnosticsError::Solution(s) => s.into(),
            DiagnosticsError::Derivative(d) => d.into(),
            DiagnosticsError::Numerics(n) => n.into(),
        }
    }
}
