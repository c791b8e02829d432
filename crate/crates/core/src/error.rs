use thiserror::Error;

/// Errors raised by the model, fitting and optimization layers.
///
/// Numeric payloads are reported in SI units (rad/s, Hz, Ω) as `f64`
/// regardless of the scalar type used for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular value: {0}")]
    Singular(String),

    #[error("transformer pole at θ = {theta} rad (cutoff {cutoff_hz:.6e} Hz)")]
    Pole { theta: f64, cutoff_hz: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("pumpistor diverges: Φ_dc/Φ₀ = {phi_dc} makes cos(πΦ_dc/Φ₀) vanish")]
    Divergence { phi_dc: f64 },

    #[error("degenerate bias: Φ_dc = 0 gives no parametric coupling (sin(πΦ_dc/Φ₀) = 0)")]
    DegenerateBias,

    #[error("singular operating point at ω = {omega:.6e} rad/s: jωL1 + X vanishes")]
    SingularOperatingPoint { omega: f64 },

    #[error(
        "oscillation threshold{}: Y_ext + Y_A vanishes",
        omega.map(|w| format!(" at ω = {w:.6e} rad/s")).unwrap_or_default()
    )]
    OscillationThreshold { omega: Option<f64> },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("no bandwidth: level {level_db} dB is above the peak gain {peak_db} dB")]
    NoBandwidth { level_db: f64, peak_db: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

impl Error {
    /// Whether the error comes from a numerical singularity (pole, divergence,
    /// oscillation) rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::Pole { .. }
                | Error::Divergence { .. }
                | Error::DegenerateBias
                | Error::SingularOperatingPoint { .. }
                | Error::OscillationThreshold { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
