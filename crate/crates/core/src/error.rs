use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series diverges for sigma = {sigma} (convergence radius {radius})")]
    SeriesDivergence { sigma: f64, radius: f64 },

    #[error("roots {first} and {second} collided at distance {distance:e}")]
    RootCollision {
        first: usize,
        second: usize,
        distance: f64,
    },

    /// A numerical routine failed to meet its own postcondition.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("topology: {0}")]
    Topology(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
