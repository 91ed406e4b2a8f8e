use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("numerical differentiation error: {0}")]
    NumericalDifferentiation(String),

    #[error("integrator error: {0}")]
    Integrator(String),

    #[error("{0}")]
    Configuration(String),

    #[error("shape error: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("no convergence after {iterations} iterations (last residual {last:.3e})")]
    NoConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("degenerate kernel basis: {0}")]
    DegenerateBasis(String),

    #[error("degenerate landscape: {0}")]
    DegenerateLandscape(String),

    #[error("critical point search failed: {reason}")]
    Search {
        reason: String,
        trajectory: Vec<[f64; 3]>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Configuration(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
