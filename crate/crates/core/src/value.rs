//! Long-run values of a provider who follows the social strategy.
//!
//! The provider believes a fraction `rho` of users is good, that good users
//! follow the strategy and that bad users never serve. Its value at a
//! decision point depends on its own label and the requester's label, which
//! gives a four-state linear system `(I - beta P) V = pi`. Comparing the
//! value of compliance against a one-shot deviation recovers the threshold
//! beliefs without using their closed forms.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::norm::{reputation_transition, social_strategy};
use crate::params::{Action, Reputation, SystemParams};

/// Values indexed by `(provider, requester)` labels, in units of the cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub rho: f64,
    /// `values[provider][requester]`
    pub values: [[f64; 2]; 2],
    benefit: f64,
    beta: f64,
}

fn state(provider: Reputation, requester: Reputation) -> usize {
    2 * provider.index() + requester.index()
}

/// Benefit received this period as a requester plus the cost paid as a
/// provider taking `action`.
fn stage_payoff(provider: Reputation, action: Action, rho: f64, benefit: f64) -> f64 {
    let received = if provider.is_good() { rho * benefit } else { 0.0 };
    let paid = if action.serves() { 1.0 } else { 0.0 };
    received - paid
}

pub fn long_run_value(rho: f64, params: &SystemParams) -> ValueTable {
    let benefit = params.gamma();
    let beta = params.beta();
    let mut transition = Matrix4::<f64>::zeros();
    let mut payoff = Vector4::<f64>::zeros();

    for provider in Reputation::ALL {
        for requester in Reputation::ALL {
            let from = state(provider, requester);
            let action = social_strategy(requester);
            payoff[from] = stage_payoff(provider, action, rho, benefit);
            let good_next = reputation_transition(provider, requester, action, params);
            for (next_label, p_label) in [(Reputation::Good, good_next), (Reputation::Bad, 1.0 - good_next)] {
                transition[(from, state(next_label, Reputation::Good))] += p_label * rho;
                transition[(from, state(next_label, Reputation::Bad))] += p_label * (1.0 - rho);
            }
        }
    }

    let system = Matrix4::identity() - transition * beta;
    // beta < 1 and P is stochastic, so the system is strictly diagonally dominant.
    let solution = system.lu().solve(&payoff).expect("I - beta P is nonsingular");

    let mut values = [[0.0; 2]; 2];
    for provider in Reputation::ALL {
        for requester in Reputation::ALL {
            values[provider.index()][requester.index()] = solution[state(provider, requester)];
        }
    }
    ValueTable {
        rho,
        values,
        benefit,
        beta,
    }
}

impl ValueTable {
    pub fn value(&self, provider: Reputation, requester: Reputation) -> f64 {
        self.values[provider.index()][requester.index()]
    }

    /// Expected value at the start of a period, before the requester is drawn.
    pub fn expected(&self, provider: Reputation) -> f64 {
        self.rho * self.value(provider, Reputation::Good)
            + (1.0 - self.rho) * self.value(provider, Reputation::Bad)
    }

    /// Value of withholding service from a good requester once and following
    /// the strategy afterwards.
    pub fn deviation_value(&self, provider: Reputation) -> f64 {
        stage_payoff(provider, Action::Withhold, self.rho, self.benefit)
            + self.beta * self.expected(Reputation::Bad)
    }

    /// Compliance value minus one-shot deviation value against a good
    /// requester. Zero exactly at the provider's threshold belief.
    pub fn compliance_gain(&self, provider: Reputation) -> f64 {
        self.value(provider, Reputation::Good) - self.deviation_value(provider)
    }

    /// Best response implied by the value comparison.
    pub fn best_response(&self, provider: Reputation, requester: Reputation) -> Action {
        match requester {
            Reputation::Bad => Action::Withhold,
            Reputation::Good if self.compliance_gain(provider) >= 0.0 => Action::Serve,
            Reputation::Good => Action::Withhold,
        }
    }

    /// Largest violation of the defining recursion.
    pub fn recursion_residual(&self, params: &SystemParams) -> f64 {
        let mut worst = 0.0f64;
        for provider in Reputation::ALL {
            for requester in Reputation::ALL {
                let action = social_strategy(requester);
                let good_next = reputation_transition(provider, requester, action, params);
                let continuation = good_next * self.expected(Reputation::Good)
                    + (1.0 - good_next) * self.expected(Reputation::Bad);
                let rhs = stage_payoff(provider, action, self.rho, self.benefit) + self.beta * continuation;
                worst = worst.max((self.value(provider, requester) - rhs).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::{thresholds, utility_loss};

    #[test]
    fn indifference_at_thresholds() {
        for &(gamma, beta, alpha) in &[(10.0, 0.25, 0.9), (5.0, 0.5, 1.0), (3.0, 0.75, 0.5)] {
            let p = SystemParams::new(gamma, beta, alpha, 0).unwrap();
            let t = thresholds(&p);
            let good = long_run_value(t.rho_g, &p);
            assert!(good.compliance_gain(Reputation::Good).abs() < 1e-9);
            let bad = long_run_value(t.rho_b, &p);
            assert!(bad.compliance_gain(Reputation::Bad).abs() < 1e-9);
            assert!(good.recursion_residual(&p) < 1e-12);
        }
    }

    #[test]
    fn value_gap_matches_utility_loss() {
        let p = SystemParams::new(7.0, 0.6, 0.4, 0).unwrap();
        for rho in [0.0, 0.2, 0.5, 1.0] {
            let table = long_run_value(rho, &p);
            let gap = table.expected(Reputation::Good) - table.expected(Reputation::Bad);
            assert!((gap - utility_loss(rho, &p)).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_belief_means_no_service() {
        let p = SystemParams::new(10.0, 0.25, 0.9, 0).unwrap();
        let table = long_run_value(0.0, &p);
        for provider in Reputation::ALL {
            assert_eq!(table.best_response(provider, Reputation::Good), Action::Withhold);
        }
    }
}
