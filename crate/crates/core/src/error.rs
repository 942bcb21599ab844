use thiserror::Error;

/// Errors produced across the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("numerical failure at step {step}: {detail}")]
    NumericalFailure { step: usize, detail: String },

    #[error("numerical failure at slab {z_index}, step {t_index}: {detail}")]
    PropagationFailure {
        z_index: usize,
        t_index: usize,
        detail: String,
    },

    #[error("degenerate Liouvillian: kernel dimension {kernel_dim}")]
    Degenerate { kernel_dim: usize },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("temperature {0} K outside the supported range [273, 500] K")]
    Domain(f64),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("fit failed after {iterations} iterations (best window {best_window_hz:.6e} Hz, residual {residual:.3e}): {reason}")]
    Fit {
        iterations: usize,
        best_window_hz: f64,
        residual: f64,
        reason: String,
    },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
