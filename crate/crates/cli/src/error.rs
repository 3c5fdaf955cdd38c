use thiserror::Error;

use mergedist::filtration::FiltrationError;
use mergedist::metrics::MetricError;
use mergedist::presentation::PresentationError;
use mergedist::tree::TreeError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    ScaleGuard(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Input(_) => 2,
            CliError::ScaleGuard(_) => 3,
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::ScaleGuard { .. } => CliError::ScaleGuard(e.to_string()),
            MetricError::TheoremViolation(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PresentationError> for CliError {
    fn from(e: PresentationError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FiltrationError> for CliError {
    fn from(e: FiltrationError) -> Self {
        CliError::Input(e.to_string())
    }
}
