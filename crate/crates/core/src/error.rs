use thiserror::Error;

/// Errors raised by spline construction, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point {0} lies outside the unit interval")]
    Domain(f64),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("degenerate geometry at ({u}, {v}): det J = {det:e}")]
    Geometry { u: f64, v: f64, det: f64 },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("MINRES breakdown at iteration {iteration}: {reason}")]
    Breakdown { iteration: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Shape { expected, actual })
    }
}
