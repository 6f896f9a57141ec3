use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An internal invariant failed (e.g. a quantity that must be real came
    /// out with a large imaginary residue). Signals corrupted input data or a
    /// bug, not a user error.
    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("numeric range failure: {0}")]
    NumericRange(String),

    /// A combinatorial evaluation was requested beyond its term budget.
    #[error("capacity exceeded: degree {requested} > limit {limit}; {hint}")]
    Capacity {
        requested: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("Fock truncation failure at n_max={n_max}: boundary leakage {leakage:.3e}; increase n_max")]
    Truncation { n_max: usize, leakage: f64 },

    #[error("quadrature did not converge: last two estimates {prev:.12e}, {last:.12e}")]
    QuadratureNonConvergence { prev: f64, last: f64 },

    #[error(
        "Fock oracle did not converge at n_max={n_max}: probability change {delta:.3e} on doubling, boundary leakage {leakage:.3e}"
    )]
    OracleNonConvergence {
        n_max: usize,
        delta: f64,
        leakage: f64,
    },

    #[error("optimization failed at restart {restart}, iteration {iteration}: {source}")]
    Optimization {
        restart: usize,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
