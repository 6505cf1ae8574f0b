use thiserror::Error;

/// Errors raised by the numerical modules.
///
/// The variant doubles as the machine-readable failure category reported by
/// the command line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("input outside the operation's domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("iteration did not converge after {iterations} steps (last residual {residual:.3e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("basis is empty: {0}")]
    EmptyBasis(String),

    #[error("budget exceeded: {what} needs {needed}, cap is {cap}")]
    Budget {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("non-degeneracy violated: eigenvalue {eigenvalue} of K in sector l={sector} is >= 1")]
    NonDegeneracy { sector: usize, eigenvalue: f64 },

    #[error("resolvent is singular: {0}")]
    Singular(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short stable tag used in result records and exit codes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parameter { .. } => "parameter",
            Error::Domain(_) => "domain",
            Error::Numerical(_) => "numerical",
            Error::Convergence { .. } => "convergence",
            Error::EmptyBasis(_) => "empty-basis",
            Error::Budget { .. } => "budget",
            Error::NonDegeneracy { .. } => "non-degeneracy",
            Error::Singular(_) => "singular",
            Error::Consistency(_) => "consistency",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
