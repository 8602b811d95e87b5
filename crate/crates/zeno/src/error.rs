use thiserror::Error;

/// Every failure the numerical modules can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZenoError {
    #[error("post-selection annihilated the state (trace {trace:e} <= 1e-15)")]
    NormalizationUnderflow { trace: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("energy curve is singular at theta = {theta} (1 + lambda sin theta ~ 0)")]
    CurveSingularity { theta: f64 },
    #[error("lambda = {lambda} admits no Zeno critical points (requires lambda > 1)")]
    NoZenoRegime { lambda: f64 },
    #[error("endpoint theta = {theta} sits on a critical angle")]
    SingularEndpoint { theta: f64 },
    #[error("lambda = {lambda} is not supported here")]
    UnsupportedLambda { lambda: f64 },
    #[error("integrand has a nullcline at theta = {theta} inside the interval")]
    IntegrandSingular { theta: f64 },
    #[error("epsilon = {epsilon} must lie in (0, {max})")]
    EpsilonTooLarge { epsilon: f64, max: f64 },
    #[error("dt = {dt} exceeds tau/10 = {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
}

impl ZenoError {
    /// Stable variant name, used by the CLI in error messages.
    pub fn name(&self) -> &'static str {
        match self {
            ZenoError::NormalizationUnderflow { .. } => "NormalizationUnderflow",
            ZenoError::InvalidState(_) => "InvalidState",
            ZenoError::InvalidParameter(_) => "InvalidParameter",
            ZenoError::CurveSingularity { .. } => "CurveSingularity",
            ZenoError::NoZenoRegime { .. } => "NoZenoRegime",
            ZenoError::SingularEndpoint { .. } => "SingularEndpoint",
            ZenoError::UnsupportedLambda { .. } => "UnsupportedLambda",
            ZenoError::IntegrandSingular { .. } => "IntegrandSingular",
            ZenoError::EpsilonTooLarge { .. } => "EpsilonTooLarge",
            ZenoError::StepTooLarge { .. } => "StepTooLarge",
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            ZenoError::InvalidState(_)
                | ZenoError::InvalidParameter(_)
                | ZenoError::EpsilonTooLarge { .. }
                | ZenoError::StepTooLarge { .. }
                | ZenoError::UnsupportedLambda { .. }
                | ZenoError::NoZenoRegime { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, ZenoError>;
