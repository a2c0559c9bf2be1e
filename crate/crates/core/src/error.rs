use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("singular transmission at θ = {theta} rad: |dx/dθ| = {gain:e} m/rad")]
    SingularTransmission { theta: f64, gain: f64 },

    #[error("tracking diverged at t = {time} s: error {error} m exceeds {limit} m")]
    Divergence { time: f64, error: f64, limit: f64 },

    #[error(
        "payload perturbation delta_m = {delta_m:e} kg is not representable around m_TCP = {payload} kg"
    )]
    Precision { delta_m: f64, payload: f64 },

    #[error("payload {payload} kg: {source}")]
    Payload {
        payload: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for numerical failures (divergence, singular transmissions)
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SingularTransmission { .. } | Error::Divergence { .. } => true,
            Error::Payload { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
