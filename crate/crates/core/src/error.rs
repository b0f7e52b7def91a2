use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("no relaxation-time formula for intermediate damping R = {damping}")]
    IntermediateDampingUnsupported { damping: f64 },

    #[error("critically damped parameters (R = {damping}) are not supported by `{operation}`")]
    CriticalDamping {
        operation: &'static str,
        damping: f64,
    },

    #[error("`{operation}` is outside its validity gate: {reason}")]
    RegimeGate {
        operation: &'static str,
        reason: String,
    },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (value {value:e}, error estimate {error_estimate:e})"
    )]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("second derivative of I(θ) diverges at θ = 0 without a cutoff")]
    DivergentAtOrigin,

    #[error("coefficients are singular at θ = {theta} and regularization failed")]
    SingularTime { theta: f64 },

    #[error("special function argument {x} is outside the domain")]
    Domain { x: f64 },

    #[error("fit window too narrow: {reason}")]
    WindowTooNarrow { reason: String },

    #[error("series is not linear: residual rms {residual_rms:e} exceeds 10% of fitted range {range:e}")]
    NonlinearSeries { residual_rms: f64, range: f64 },

    #[error("degenerate case: {reason}")]
    DegenerateCase { reason: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
