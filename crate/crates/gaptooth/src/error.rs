use thiserror::Error;

/// Crate-wide error type.
///
/// `Config` and `Geometry` describe rejected input; `SingularTbc`,
/// `Diverged` and `NonzeroFixedPoint` are run-time failures of an otherwise
/// valid configuration.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation.  `field` names the offending entry.
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    /// The experiment file could not be parsed.
    #[error("cannot parse experiment file: {0}")]
    Parse(String),

    /// The mixed boundary condition cannot be solved for the edge value.
    #[error("mixed boundary condition is singular: |a + 3b/(2 eta)| = {pivot:.3e}")]
    SingularTbc { pivot: f64 },

    /// A micro value became non-finite during time stepping.
    #[error("solution diverged at t = {t:.6e} (tooth {tooth}, micro point {index})")]
    Diverged { tooth: usize, index: usize, t: f64 },

    /// The one-step map moved the zero state, so it cannot be linearised
    /// by unit-vector columns.  This indicates a bug in the configuration.
    #[error("one-step map has a nonzero fixed point: |phi(0)|_max = {norm:.3e}")]
    NonzeroFixedPoint { norm: f64 },

    /// The eigensolver failed to converge on the one-step map.
    #[error("eigendecomposition of the one-step map failed: {0}")]
    Eigen(String),

    /// Unexpected internal failure (thread pool construction and similar).
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line interface: 2 for rejected
    /// input, 3 for numerical divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parse(_) => 2,
            Error::Diverged { .. } => 3,
            _ => 1,
        }
    }
}
