use thiserror::Error;

/// Errors raised while validating inputs to the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("benefit-to-cost ratio must be finite and > 1, got {0}")]
    Gamma(f64),
    #[error("benefit and cost must satisfy b > c > 0, got b = {benefit}, c = {cost}")]
    BenefitCost { benefit: f64, cost: f64 },
    #[error("discount factor must lie in (0, 1), got {0}")]
    Discount(f64),
    #[error("punishment probability must lie in [0, 1], got {0}")]
    Punishment(f64),
    #[error("observation granularity {0} exceeds the supported maximum {max}", max = crate::MAX_GRANULARITY)]
    Granularity(u32),
    #[error("{name} must lie in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Failure modes of the numerical searches.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("no granularity up to the cap {cap} reaches the requested mass")]
    CapExceeded { cap: u32 },
    #[error("bounds are not applicable: a belief threshold exceeds 1")]
    NotApplicable,
    #[error(transparent)]
    Param(#[from] ParamError),
}
