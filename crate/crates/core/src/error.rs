use thiserror::Error;

use crate::net::ParamVector;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A loss or gradient evaluation produced a non-finite value.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Training hit a non-finite loss, gradient or update. `last_finite`
    /// holds the parameters before the failing step.
    #[error("training diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        last_finite: Box<ParamVector>,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
