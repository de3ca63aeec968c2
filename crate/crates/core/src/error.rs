use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A retraction (or its inverse) was evaluated outside its invertibility domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian in Newton solve")]
    SingularJacobian,

    #[error("unknown tableau `{0}`")]
    UnknownTableau(String),

    #[error("step {step} (t = {t}): {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("reference solutions disagree by {spread:.3e}, larger than the smallest measured error {smallest:.3e}")]
    ReferenceInconsistent { spread: f64, smallest: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Domain(_)
            | Error::NonConvergence { .. }
            | Error::SingularJacobian
            | Error::ReferenceInconsistent { .. } => true,
            Error::Step { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn at_step(self, step: usize, t: f64) -> Self {
        Error::Step {
            step,
            t,
            source: Box::new(self),
        }
    }
}
