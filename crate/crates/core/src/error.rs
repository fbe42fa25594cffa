use thiserror::Error;

use crate::constitutive::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inadmissible parameters: {0}")]
    InvalidParams(ValidationReport),
    #[error("non-finite tensor")]
    NonFiniteTensor,
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("singular flux: theta = 0 with alpha < 0")]
    SingularFlux,
    #[error("insufficient resolution: {requested} {family} modes requested, {available} available at N = {resolution}")]
    InsufficientResolution {
        family: &'static str,
        requested: usize,
        available: usize,
        resolution: usize,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("rank mismatch: {0}")]
    RankMismatch(&'static str),
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(usize, usize),
    #[error("field is not solenoidal (max |div| = {0:e})")]
    NotSolenoidal(f64),
    #[error("mass matrix not positive definite")]
    MassNotSpd,
    #[error("mass solve failed")]
    MassSolveFailed,
    #[error("implicit step did not converge after {iterations} iterations (update {update:e})")]
    NonlinearSolveFailed { iterations: usize, update: f64 },
    #[error("blow-up detected at t = {0}")]
    BlowUp(f64),
    #[error("invariant violated at t = {t}: {what}")]
    Invariant { t: f64, what: String },
    #[error("step failed at t = {t}: {source}")]
    StepFailed { t: f64, source: Box<Error> },
    #[error("invalid step configuration: {0}")]
    InvalidStep(String),
    #[error("{0}")]
    Precondition(String),
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config validation failed: {}", .0.join("; "))]
    ConfigInvalid(Vec<String>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    /// Innermost error, looking through step time stamps.
    pub fn root(&self) -> &Error {
        match self {
            Error::StepFailed { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures of the numerics rather than of the inputs or of a
    /// checked invariant.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::NonFinite(_)
                | Error::NonFiniteTensor
                | Error::SingularFlux
                | Error::MassNotSpd
                | Error::MassSolveFailed
                | Error::NonlinearSolveFailed { .. }
                | Error::BlowUp(_)
        )
    }

    pub fn is_invariant(&self) -> bool {
        matches!(self.root(), Error::Invariant { .. } | Error::NotSolenoidal(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
