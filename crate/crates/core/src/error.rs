use alloc::string::String;

/// Errors raised by constructions, propagation and analysis.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |H - H†| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("eigensolver failed: residual max |HV - VΛ| = {residual:e}")]
    EigensolverFailure { residual: f64 },

    #[error("norm drifted by {drift:e} at t = {time}")]
    NormDrift { time: f64, drift: f64 },

    #[error("Fock cutoff {cutoff} too small, need at least {required}; raise cutoff")]
    CutoffTooSmall { required: usize, cutoff: usize },

    #[error("truncation leakage {leakage:e} exceeds gate {gate:e} at t = {time}; raise cutoff")]
    LeakageExceeded { time: f64, leakage: f64, gate: f64 },

    #[error("spectrum is degenerate within the truncation (minimum gap {gap:e})")]
    Degenerate { gap: f64 },

    #[error("operator under the square root is not positive (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trajectory undersampled: spacing {spacing:e} must be below {required:e}")]
    Undersampled { spacing: f64, required: f64 },

    #[error("position grid too coarse: {reason}")]
    GridTooCoarse { reason: String },

    #[error("least-squares fit failed: {reason}")]
    FitFailed { reason: String },
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input or configuration.
    Input,
    /// A physical validity gate failed (leakage, degeneracy, positivity, resolution).
    PhysicsGate,
    /// Numerical breakdown (eigensolver, norm drift, singular fit).
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } => ErrorClass::Input,
            Error::CutoffTooSmall { .. }
            | Error::LeakageExceeded { .. }
            | Error::Degenerate { .. }
            | Error::NotPositive { .. }
            | Error::Undersampled { .. }
            | Error::GridTooCoarse { .. } => ErrorClass::PhysicsGate,
            Error::NotHermitian { .. }
            | Error::NotNormalized { .. }
            | Error::EigensolverFailure { .. }
            | Error::NormDrift { .. }
            | Error::FitFailed { .. } => ErrorClass::Numerical,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
