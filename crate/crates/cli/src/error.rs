use weierlab_core::Error as CoreError;

use crate::config::ConfigError;

/// Exit status 1: configuration or validation problem. 2: numerical target missed.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("error[config]: {0}")]
    Config(#[from] ConfigError),
    #[error("error[{module}/{kind}]: {source}")]
    Core { module: &'static str, kind: &'static str, source: CoreError },
    #[error("error[io]: {0}")]
    Io(#[from] std::io::Error),
    #[error("error[verify]: {failed} of {total} invariants failed")]
    Verify { failed: usize, total: usize },
    #[error("error[usage]: {0}")]
    Usage(String),
}

fn kind(e: &CoreError) -> &'static str {
    match e {
        CoreError::InvalidSystem(_) => "invalid-system",
        CoreError::InvalidMeasure(_) => "invalid-measure",
        CoreError::SymbolOutOfRange { .. } => "symbol-out-of-range",
        CoreError::NonPositiveTolerance(_) => "non-positive-tolerance",
        CoreError::Domain(_) => "domain",
        CoreError::BracketFailure { .. } => "bracket-failure",
        CoreError::Diverged { .. } => "diverged",
        CoreError::Unsupported(_) => "unsupported",
        CoreError::NearPartitionPoint { .. } => "near-partition-point",
        CoreError::StepSizeFailure { .. } => "step-size-failure",
        CoreError::OutsideAdmissible { .. } => "outside-admissible",
        CoreError::InsufficientSamples(_) => "insufficient-samples",
    }
}

impl CliError {
    pub fn core(module: &'static str) -> impl FnOnce(CoreError) -> CliError {
        move |source| CliError::Core { module, kind: kind(&source), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Usage(_) => 1,
            CliError::Core { source, .. } => match source {
                CoreError::BracketFailure { .. }
                | CoreError::Diverged { .. }
                | CoreError::StepSizeFailure { .. }
                | CoreError::NearPartitionPoint { .. }
                | CoreError::InsufficientSamples(_) => 2,
                _ => 1,
            },
            CliError::Verify { .. } => 2,
        }
    }
}
