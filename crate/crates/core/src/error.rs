use thiserror::Error;

#[derive(Debug, Error)]
pub enum LzsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate {what}: gap {gap:e} below tolerance")]
    Degenerate { what: &'static str, gap: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("propagator not unitary: defect {defect:e} (increase n_steps)")]
    Unitarity { defect: f64 },

    #[error("harmonic tail {weight:e} still above 1e-8 at K = {k} (grid limit)")]
    HarmonicTail { k: usize, weight: f64 },

    #[error("no bath with tag `{0}`")]
    MissingBath(String),

    #[error("inconsistent generator: {0}")]
    Generator(String),

    #[error("steady state not unique: eigenvalues {first:e} and {second:e} both below threshold")]
    NonUniqueSteadyState { first: f64, second: f64 },

    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LzsError>;
