use thiserror::Error;

use crate::probcore::Var;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("negative or non-finite weight {value} at index {index}")]
    BadWeight { index: usize, value: f64 },

    #[error("weights sum to {sum:.15}, expected 1 within 1e-12")]
    NotNormalized { sum: f64 },

    #[error("row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("variable {0} is not an axis of this joint")]
    UnknownVariable(Var),

    #[error("variable {0} appears more than once")]
    DuplicateVariable(Var),

    #[error("variable sets overlap on {0}")]
    OverlappingSets(Var),

    #[error("expected axes {expected}, found {found}")]
    WrongAxes { expected: String, found: String },

    #[error("unsupported channel: {0}")]
    Unsupported(String),

    #[error("no kernel direction found for {atoms} atoms")]
    NoKernelDirection { atoms: usize },

    #[error("root not bracketed on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("invalid search configuration: {0}")]
    Config(String),

    #[error("information chain violated at step {step}: {lhs} > {rhs}")]
    ChainViolation { step: usize, lhs: f64, rhs: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
