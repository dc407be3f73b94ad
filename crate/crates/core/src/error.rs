use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input: bad weights, unknown steps, empty windows.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel is not irreducible ({components} strongly connected components)")]
    Reducible { components: usize },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    /// The exponential moment has no minimizer: the support lies in the
    /// closed half-space `<direction, s> <= 0`.
    #[error("degenerate support: infimum approached at infinity along {direction:?} (limit {limit})")]
    DegenerateSupport { direction: Vec<f64>, limit: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
