use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("approximation failed: {0}")]
    Approximation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("setup failed: {0}")]
    Setup(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("internal state error: {0}")]
    InternalState(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed binary data: {0}")]
    Decode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ArenaError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ArenaError::InvalidArgument(msg.into()))
}
