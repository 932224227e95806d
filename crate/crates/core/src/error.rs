use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The greedy search ran out of compatible candidates.
    #[error(
        "placement infeasible: candidate pool exhausted at iteration {iteration} of {requested}"
    )]
    Infeasible { iteration: usize, requested: usize },

    /// The barrier solver hit its iteration cap. Carries the last iterate
    /// (in the solver's scaled coordinates) and the residuals reached.
    #[error(
        "solver did not converge after {iterations} Newton steps \
         (duality gap {duality_gap:e}, Newton decrement {newton_decrement:e})"
    )]
    Solver {
        iterations: usize,
        duality_gap: f64,
        newton_decrement: f64,
        last_iterate: Vec<f64>,
    },

    #[error("enumeration too large: {count} integer splits exceeds the limit of {limit}")]
    Size { count: u128, limit: u128 },

    #[error("config field `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
