use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: endpoints must be finite with lo <= hi")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid scenario: {0}")]
    InvalidConfig(String),

    #[error("m = {m} is out of range [{min}, {max}]")]
    MOutOfRange { m: u32, min: u32, max: u32 },

    #[error("pilot index {index} is out of range for {n_p} pilots")]
    PilotIndexOutOfRange { index: u32, n_p: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
