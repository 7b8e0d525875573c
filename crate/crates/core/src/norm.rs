//! The social norm and the provider's incentive analysis.
//!
//! The prescribed strategy serves good requesters and withholds from bad
//! ones. A good provider who deviates against a good requester becomes bad;
//! a bad provider who complies is restored with probability `alpha`.
//! Whether a provider complies depends on its belief `rho` about the
//! fraction of good users, through the two threshold beliefs computed here.

use serde::{Deserialize, Serialize};

use crate::params::{Action, Reputation, SystemParams};

/// Prescribed action against a requester with the given label.
pub fn social_strategy(requester: Reputation) -> Action {
    match requester {
        Reputation::Good => Action::Serve,
        Reputation::Bad => Action::Withhold,
    }
}

/// Probability that a provider holds a good label next period.
pub fn reputation_transition(
    provider: Reputation,
    requester: Reputation,
    action: Action,
    params: &SystemParams,
) -> f64 {
    if requester == Reputation::Bad {
        return if provider.is_good() { 1.0 } else { 0.0 };
    }
    if action != social_strategy(requester) {
        return 0.0;
    }
    match provider {
        Reputation::Good => 1.0,
        Reputation::Bad => params.alpha(),
    }
}

/// Threshold beliefs above which good (`rho_g`) and bad (`rho_b`) providers
/// comply. A threshold is `+inf` when no belief can satisfy it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    #[serde(with = "extended_real")]
    pub rho_g: f64,
    #[serde(with = "extended_real")]
    pub rho_b: f64,
}

/// Serializes `+inf` as the string `"inf"`; JSON has no infinity literal.
mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            s.serialize_f64(*value)
        } else {
            s.serialize_str("inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

impl Thresholds {
    pub fn for_params(params: &SystemParams) -> Self {
        thresholds(params)
    }

    /// Threshold that applies to a provider with the given label.
    pub fn for_label(&self, provider: Reputation) -> f64 {
        match provider {
            Reputation::Good => self.rho_g,
            Reputation::Bad => self.rho_b,
        }
    }

    /// Bad providers can be induced to comply for some belief in `[0, 1]`.
    pub fn restorable(&self) -> bool {
        self.rho_b <= 1.0
    }
}

fn ratio_or_infinite(numerator: f64, denominator: f64) -> f64 {
    if denominator > 0.0 {
        numerator / denominator
    } else {
        f64::INFINITY
    }
}

pub fn thresholds(params: &SystemParams) -> Thresholds {
    let (beta, gamma, alpha) = (params.beta(), params.gamma(), params.alpha());
    let impatience = 1.0 - beta;
    Thresholds {
        rho_g: ratio_or_infinite(impatience, beta * (gamma - alpha)),
        rho_b: ratio_or_infinite(impatience, beta * alpha * (gamma - 1.0)),
    }
}

/// Discounted-benefit loss from holding a bad label, measured from the
/// period in which the label was lost, in units of the cost `c`.
///
/// Uses the canonical scaling `b = gamma`, `c = 1`.
pub fn utility_loss(rho: f64, params: &SystemParams) -> f64 {
    let beta = params.beta();
    rho * params.gamma() / (1.0 - beta * (1.0 - rho * params.alpha()))
}

/// Optimal action of a provider holding belief `rho`. Ties at a threshold
/// resolve to compliance.
pub fn best_response(
    provider: Reputation,
    requester: Reputation,
    rho: f64,
    params: &SystemParams,
) -> Action {
    best_response_with(provider, requester, rho, &thresholds(params))
}

/// [`best_response`] with precomputed thresholds.
pub fn best_response_with(
    provider: Reputation,
    requester: Reputation,
    rho: f64,
    thresholds: &Thresholds,
) -> Action {
    match requester {
        Reputation::Bad => Action::Withhold,
        Reputation::Good if rho >= thresholds.for_label(provider) => Action::Serve,
        Reputation::Good => Action::Withhold,
    }
}

/// False when not even good providers can be induced to serve.
pub fn cooperation_feasible(params: &SystemParams) -> bool {
    thresholds(params).rho_g <= 1.0
}
