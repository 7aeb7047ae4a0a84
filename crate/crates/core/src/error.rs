use thiserror::Error;

/// Errors raised by the modeling, estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A spectral density was evaluated exactly at one of its poles.
    #[error("spectral density has a pole at frequency {omega}")]
    Pole { omega: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    /// The information matrix is singular; `null_space` holds a basis of the
    /// non-identified directions in parameter order.
    #[error("singular information matrix ({} null direction(s))", null_space.len())]
    Singular { null_space: Vec<Vec<f64>> },

    /// Every differencing cell failed; one message per cell.
    #[error("all {} differencing cells failed", cells.len())]
    FitFailed { cells: Vec<String> },

    #[error("simulation failed: {0}")]
    Simulation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
