//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor argument violates its documented range or consistency rule.
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: String, reason: String },

    /// A designed pulse would need an amplitude above the hard cap.
    #[error(
        "designed pulse needs |f| = {required_over_gamma:.5} Gamma, above the hard cap \
         {cap_over_gamma} Gamma; lengthen the pulse or reduce the target area"
    )]
    AmplitudeCapExceeded {
        required_over_gamma: f64,
        cap_over_gamma: f64,
    },

    /// The fixed-step integrator was asked to take steps outside its stability guard.
    #[error("integration step too large: dt * max(1, |f|/Gamma) = {product:.3e} > {limit:.3e}")]
    StepTooLarge { product: f64, limit: f64 },

    /// Two eigenvalues coincide within working precision; Sylvester's formula
    /// has a vanishing denominator there.
    #[error("near-degenerate spectrum: min eigenvalue gap {gap:.3e} below threshold {threshold:.3e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    /// Scenario file or flag combination could not be turned into a runnable scenario.
    #[error("config error: {0}")]
    Config(String),

    /// One or more cross-validation checks exceeded tolerance.
    #[error("validation failed: {failed} of {total} checks exceeded tolerance")]
    ValidationFailed { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.to_owned(),
            reason: reason.into(),
        }
    }

    /// Process exit code contract: 0 ok, 1 I/O, 2 bad input, 3 numeric
    /// guard, 4 validation failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_) => 1,
            Error::InvalidInput { .. }
            | Error::AmplitudeCapExceeded { .. }
            | Error::Config(_)
            | Error::Json(_) => 2,
            Error::StepTooLarge { .. } | Error::DegenerateSpectrum { .. } => 3,
            Error::ValidationFailed { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
