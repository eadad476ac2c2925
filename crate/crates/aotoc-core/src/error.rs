use thiserror::Error;

/// Errors surfaced by the library. `NumericalContract` marks violations of
/// internal numerical guarantees (imaginary residue, clamp overshoot) and is
/// mapped to a distinct exit code by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("not an admissible channel: {0}")]
    BadChannel(String),

    #[error("numerical contract violated: {0}")]
    NumericalContract(String),

    #[error("dense-simulation guard: L={l} exceeds limit {max} (set AOTOC_MAX_L to raise)")]
    ResourceGuard { l: usize, max: usize },

    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
