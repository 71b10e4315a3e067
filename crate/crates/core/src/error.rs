use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error(
        "truncation discards tail mass {tail_mass:e} (tolerance {tolerance:e}); \
         use n_max >= {suggested_n_max}"
    )]
    Truncation {
        tail_mass: f64,
        tolerance: f64,
        suggested_n_max: usize,
    },

    #[error("conditional operation has zero success probability ({0:e})")]
    ZeroProbability(f64),

    #[error("length mismatch: state has {state} levels, filter has {filter}")]
    LengthMismatch { state: usize, filter: usize },

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("acceptance region is empty; maximal figure of merit on the grid is {max_fidelity}")]
    EmptyRegion { max_fidelity: f64 },

    #[error("malformed state data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
