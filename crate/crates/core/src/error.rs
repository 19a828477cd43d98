use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("quadrature did not converge (estimate {estimate:.3e}, error {error:.3e}, tolerance {tolerance:.3e})")]
    QuadratureNoConvergence {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("tabulated function has not decayed at tau_max = {tau_max} ps (|f| = {tail:.3e} > {tolerance:.3e})")]
    TailNotDecayed {
        tau_max: f64,
        tail: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    #[error("steady state is not unique (singular values {smallest:.3e}, {second:.3e})")]
    DegenerateNullSpace { smallest: f64, second: f64 },

    #[error("steady-state solve did not converge: {0}")]
    NoConvergence(String),

    #[error("time integration step size underflow at t = {t} ps (h = {step:.3e})")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("no peak found: {0}")]
    NoPeak(String),

    #[error("Lorentzian fit diverged: {0}")]
    FitDiverged(String),

    #[error("at laser detuning {detuning_uev} ueV: {source}")]
    AtDetuning {
        detuning_uev: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
