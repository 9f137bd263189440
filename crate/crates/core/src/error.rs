use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A density or transform specification violates its invariants.
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid score specification: {0}")]
    InvalidScore(String),

    /// Adaptive quadrature ran out of subdivisions. The best estimate is kept.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {best_estimate:e}, error estimate {error_estimate:e})"
    )]
    Quadrature {
        best_estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("search range [{lo}, {hi}] does not bracket a solution")]
    NotBracketed { lo: f64, hi: f64 },

    /// Both densities vanish at the outcome so their ratio is 0/0.
    #[error("undefined density ratio: {0}")]
    UndefinedRatio(String),

    #[error("witness construction failed: {0}")]
    Infeasible(String),

    /// Malformed archive input, with the 1-based line number.
    #[error("{message}, line {line}")]
    Parse { line: usize, message: String },

    #[error("archive error: {0}")]
    Archive(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn density(msg: impl Into<String>) -> Self {
        Error::InvalidDensity(msg.into())
    }

    /// True for errors caused by the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::NotBracketed { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {x}")))
    }
}
