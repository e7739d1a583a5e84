use thiserror::Error;

use crate::system::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid system: {}", format_violations(.0))]
    InvalidSystem(Vec<Violation>),

    #[error("invalid probability vector: {0}")]
    InvalidMeasure(String),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("pressure bracket failure: P({at}) = {value} has the wrong sign")]
    BracketFailure { at: f64, value: f64 },

    #[error("orbit diverged after {step} steps")]
    Diverged { step: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("x = {x} lies within {h} of partition point {point}")]
    NearPartitionPoint { x: f64, h: f64, point: f64 },

    #[error("fibre integration residual {residual:e} above target {target:e} after refinement")]
    StepSizeFailure { residual: f64, target: f64 },

    #[error("t = {t} outside admissible interval: violates {endpoint}")]
    OutsideAdmissible { t: f64, endpoint: String },

    #[error("not enough samples: {0}")]
    InsufficientSamples(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
