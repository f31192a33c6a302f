use thiserror::Error;

/// Errors produced by the library. The CLI maps these onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("probability out of range: entry {index} = {value}")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("level too deep: {0}")]
    LevelTooDeep(String),

    #[error("extinction-dominated: {attempts} empty draws (analytic extinction probability {extinction_probability:.6})")]
    ExtinctionDominated {
        attempts: u32,
        extinction_probability: f64,
    },

    #[error("geometry mismatch: {0}")]
    Mismatch(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("numerical blow-up: {0}")]
    BlowUp(String),

    #[error("empty sum: {0}")]
    EmptySum(String),

    #[error("invalid candidate function: {0}")]
    Structural(String),

    #[error("out of model: {0}")]
    OutOfModel(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
