use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Domain errors (resonances, endpoint mismatches, stale excision handles)
/// are distinguished from malformed input by [`Error::is_domain`], which is
/// what the command-line front end maps onto its exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("resonance {n:?} inside the lattice ball; no Diophantine certificate exists")]
    ResonanceFound { n: Vec<i64> },

    #[error("resonant mode {n:?} carries nonzero data; the cohomological equation has no smooth solution")]
    ResonantMode { n: Vec<i64> },

    #[error("bad Liouville schedule: {0}")]
    BadSchedule(String),

    #[error("curve endpoints do not match: {0}")]
    EndpointMismatch(String),

    #[error("current is not based at the requested point: {0}")]
    BasepointMismatch(String),

    #[error("retraced-arc location does not belong to this family")]
    StaleLocation,

    #[error("no battery form separates the two points (inconclusive at this battery size)")]
    SeparationNotFound,

    #[error("twisted evaluation routes disagree: boundary route {boundary}, form route {form}")]
    TwistMismatch { boundary: f64, form: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("invalid direction vector: {0}")]
    InvalidDirection(String),

    #[error("invalid trigonometric polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// `true` for mathematical obstructions, `false` for malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::ResonanceFound { .. }
                | Error::ResonantMode { .. }
                | Error::EndpointMismatch(_)
                | Error::BasepointMismatch(_)
                | Error::StaleLocation
                | Error::SeparationNotFound
                | Error::TwistMismatch { .. }
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ResonanceFound { .. } => "ResonanceFound",
            Error::ResonantMode { .. } => "ResonantMode",
            Error::BadSchedule(_) => "BadSchedule",
            Error::EndpointMismatch(_) => "EndpointMismatch",
            Error::BasepointMismatch(_) => "BasepointMismatch",
            Error::StaleLocation => "StaleLocation",
            Error::SeparationNotFound => "SeparationNotFound",
            Error::TwistMismatch { .. } => "TwistMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidSegment(_) => "InvalidSegment",
            Error::InvalidDirection(_) => "InvalidDirection",
            Error::InvalidPolynomial(_) => "InvalidPolynomial",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
