use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("θ={theta} lies outside the parameter space [{lo}, {hi}]")]
    Domain { theta: f64, lo: f64, hi: f64 },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Both hypotheses carry zero posterior probability.
    #[error("degenerate evidence: P(Θ0|y) = P(Θ1|y) = 0")]
    DegenerateEvidence,

    /// The hypothesis pair leaves part of the parameter space uncovered and
    /// the caller did not opt into a restricted space.
    #[error("hypotheses do not cover the parameter space (uncovered measure {uncovered}); set restricted_space to decide on the restricted space")]
    NotCovering { uncovered: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for failures caused by malformed input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::Validation(_)
                | Error::Parameter(_)
                | Error::Config(_)
                | Error::NotCovering { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
