use packet_decoherence::Error;
use serde::Serialize;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// Error record printed as JSON on stderr before exiting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    pub code: i32,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: "config",
            message: message.into(),
            code: EXIT_CONFIG,
        }
    }

    pub fn io(err: impl std::fmt::Display) -> Self {
        Self {
            kind: "io",
            message: err.to_string(),
            code: EXIT_CONFIG,
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: "validation",
            message: message.into(),
            code: EXIT_VALIDATION,
        }
    }

    pub fn record(&self) -> String {
        serde_json::to_string(&serde_json::json!({ "error": self })).unwrap_or_else(|_| self.message.clone())
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let (kind, code) = match &err {
            Error::NonConvergence { .. } => ("non_convergence", EXIT_NUMERICAL),
            Error::SingularTime { .. } => ("singular_time", EXIT_NUMERICAL),
            Error::Domain { .. } => ("domain", EXIT_NUMERICAL),
            Error::NonlinearSeries { .. } => ("nonlinear_series", EXIT_NUMERICAL),
            Error::DivergentAtOrigin => ("divergent_at_origin", EXIT_NUMERICAL),
            Error::InvalidParameter { .. } => ("invalid_parameter", EXIT_CONFIG),
            Error::IntermediateDampingUnsupported { .. } => ("intermediate_damping", EXIT_CONFIG),
            Error::CriticalDamping { .. } => ("critical_damping", EXIT_CONFIG),
            Error::RegimeGate { .. } => ("regime_gate", EXIT_CONFIG),
            Error::WindowTooNarrow { .. } => ("window_too_narrow", EXIT_CONFIG),
            Error::DegenerateCase { .. } => ("degenerate_case", EXIT_CONFIG),
        };
        Self {
            kind,
            message: err.to_string(),
            code,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::io(err)
    }
}

impl From<csv::Error> for Failure {
    fn from(err: csv::Error) -> Self {
        Failure::io(err)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(err: serde_json::Error) -> Self {
        Failure::io(err)
    }
}
