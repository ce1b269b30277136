use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("inconsistent coherence times: T2 = {t2:e} s exceeds 2*T1 = {two_t1:e} s")]
    InconsistentCoherence { t2: f64, two_t1: f64 },

    #[error("thermal population {p1} has no steady state of the form Gamma/(2*Gamma + gamma_down); need 0 <= p1 < 0.5")]
    PopulationOutOfRange { p1: f64 },

    #[error("{what} = {value:e} outside supported range [{min:e}, {max:e}]")]
    Range { what: &'static str, value: f64, min: f64, max: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} above tolerance {tolerance:e} after {subdivisions} subdivisions")]
    Quadrature { estimate: f64, error: f64, tolerance: f64, subdivisions: usize },

    #[error("{0}")]
    Unsupported(String),

    #[error("maximum at the {edge} end of the sigma_q range (hbar/sigma_q = {length:e} m); extend the range")]
    MaxAtBoundary { edge: &'static str, length: f64 },

    #[error("grid too small: boundary/max ratio {ratio:e}; need a span of at least +/-{required_span:.2}")]
    GridMargin { ratio: f64, required_span: f64 },

    #[error("insufficient data: {pixels} pixels, need at least {required}")]
    InsufficientData { pixels: usize, required: usize },

    #[error("calibration failed: residual rms {rms:e} exceeds 10x estimated noise {noise:e}")]
    CalibrationFailure { rms: f64, noise: f64 },

    #[error("posterior mass {tail_mass:e} beyond the Gamma grid end {gamma_max:e} s^-1; extend the grid")]
    GridBoundary { tail_mass: f64, gamma_max: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidInput { field: field.into(), reason: reason.into() }
}
