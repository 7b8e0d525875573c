//! Environment and mechanism parameters.
//!
//! Every analytic quantity depends only on the benefit-to-cost ratio, the
//! discount factor, the punishment probability and the observation
//! granularity, so those four form the canonical representation with the
//! cost normalized to 1. An explicit `(b, c)` pair is kept only to rescale
//! welfare figures.

use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Request arrival rate. Every user issues exactly one request per period.
pub const ARRIVAL_RATE: f64 = 1.0;

/// Largest observation granularity accepted by the belief engine.
pub const MAX_GRANULARITY: u32 = 1000;

/// Reputation label of a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reputation {
    Bad = 0,
    Good = 1,
}

impl Reputation {
    pub const ALL: [Reputation; 2] = [Reputation::Bad, Reputation::Good];

    pub fn is_good(self) -> bool {
        self == Reputation::Good
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl From<bool> for Reputation {
    fn from(good: bool) -> Self {
        if good {
            Reputation::Good
        } else {
            Reputation::Bad
        }
    }
}

/// Provider action in the gift-giving game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Withhold = 0,
    Serve = 1,
}

impl Action {
    pub fn serves(self) -> bool {
        self == Action::Serve
    }
}

/// Full parameterization of the environment (`gamma`, `beta`, `M`) and the
/// mechanism (`alpha`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    gamma: f64,
    beta: f64,
    alpha: f64,
    granularity: u32,
    benefit: f64,
    cost: f64,
}

impl SystemParams {
    /// Builds parameters from the benefit-to-cost ratio with `c = 1`.
    pub fn new(gamma: f64, beta: f64, alpha: f64, granularity: u32) -> Result<Self, ParamError> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(ParamError::Gamma(gamma));
        }
        Self::validated(gamma, beta, alpha, granularity, gamma, 1.0)
    }

    /// Builds parameters from an explicit benefit and cost.
    pub fn from_benefit_cost(
        benefit: f64,
        cost: f64,
        beta: f64,
        alpha: f64,
        granularity: u32,
    ) -> Result<Self, ParamError> {
        if !(benefit.is_finite() && cost.is_finite() && cost > 0.0 && benefit > cost) {
            return Err(ParamError::BenefitCost { benefit, cost });
        }
        Self::validated(benefit / cost, beta, alpha, granularity, benefit, cost)
    }

    fn validated(
        gamma: f64,
        beta: f64,
        alpha: f64,
        granularity: u32,
        benefit: f64,
        cost: f64,
    ) -> Result<Self, ParamError> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(ParamError::Discount(beta));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ParamError::Punishment(alpha));
        }
        if granularity > MAX_GRANULARITY {
            return Err(ParamError::Granularity(granularity));
        }
        Ok(Self {
            gamma,
            beta,
            alpha,
            granularity,
            benefit,
            cost,
        })
    }

    /// Same environment with a different punishment probability.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self, ParamError> {
        Self::validated(self.gamma, self.beta, alpha, self.granularity, self.benefit, self.cost)
    }

    /// Same mechanism with a different observation granularity.
    pub fn with_granularity(&self, granularity: u32) -> Result<Self, ParamError> {
        Self::validated(self.gamma, self.beta, self.alpha, granularity, self.benefit, self.cost)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of reputations a user samples per period (`M`).
    pub fn granularity(&self) -> u32 {
        self.granularity
    }

    pub fn benefit(&self) -> f64 {
        self.benefit
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }
}

/// Checks that `value` is a probability.
pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ParamError::Probability { name, value })
    }
}
