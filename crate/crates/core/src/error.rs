use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dot index {index} out of range for a space with {num_dots} dots")]
    SiteOutOfRange { index: usize, num_dots: usize },

    #[error("operator involves the excited level, but the space has two levels per dot")]
    MissingExcitedLevel,

    #[error("space has no cavity factor")]
    NoCavity,

    #[error("operands live in different Hilbert spaces")]
    SpaceMismatch,

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tier mismatch: {0}")]
    TierMismatch(String),

    #[error("step size underflow at t = {t} ns (h = {h:e} ns)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t} ns")]
    StepBudget { t: f64, max_steps: usize },

    #[error("norm drift {drift:e} beyond limit at t = {t} ns")]
    NormDrift { drift: f64, t: f64 },

    #[error("trace drift {drift:e} beyond limit at t = {t} ns")]
    TraceDrift { drift: f64, t: f64 },

    #[error("density matrix lost positivity at t = {t} ns (min eigenvalue {min_eigenvalue:e})")]
    Positivity { min_eigenvalue: f64, t: f64 },

    #[error("density matrix lost hermiticity at t = {t} ns (defect {defect:e})")]
    Hermiticity { defect: f64, t: f64 },

    #[error("basis state {state} leaked: overlap with its own ray is {overlap:.6}")]
    Leakage { state: usize, overlap: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

impl Error {
    /// True for failures raised by the numerical engines rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. }
                | Error::StepBudget { .. }
                | Error::NormDrift { .. }
                | Error::TraceDrift { .. }
                | Error::Positivity { .. }
                | Error::Hermiticity { .. }
                | Error::Leakage { .. }
                | Error::Capacity(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
