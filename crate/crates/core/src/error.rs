use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the admissible region.
    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The truncated expansion near the origin is used too far from it.
    #[error("series expansion diverged at xi = {xi:.3e} (last term {last_term:.3e})")]
    SeriesDiverged { xi: f64, last_term: f64 },

    /// The adaptive stepper could not make progress.
    #[error("step size underflow at xi = {xi:.6e} (h = {h:.3e})")]
    StepFailure { xi: f64, h: f64 },

    #[error("no A/C bracket found after {attempts} attempts (last a = {last_a:.6e})")]
    BracketNotFound { attempts: usize, last_a: f64 },

    /// A C classification was observed below an A classification.
    #[error("non-monotone classification: C at a = {c_at:.12e} lies below A at a = {a_at:.12e}")]
    NonMonotoneClassification { a_at: f64, c_at: f64 },

    #[error("insufficient tail: {found} samples in the fit window, need {needed}")]
    InsufficientTail { found: usize, needed: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("negative initial data at r = {r:.6e} (u = {value:.6e})")]
    NegativeData { r: f64, value: f64 },

    #[error("Newton iteration diverged at t = {t:.6e} after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged { t: f64, iterations: usize, residual: f64 },

    #[error("configuration error at `{path}`: {message}")]
    ConfigError { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigError { path: path.into(), message: message.into() }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SeriesDiverged { .. }
                | Error::StepFailure { .. }
                | Error::BracketNotFound { .. }
                | Error::NonMonotoneClassification { .. }
                | Error::InsufficientTail { .. }
                | Error::NewtonDiverged { .. }
                | Error::DomainError(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
