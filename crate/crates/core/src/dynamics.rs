//! Mean-field dynamics of the social reputation.
//!
//! Each period a bad user turns good when it meets a good requester, holds a
//! belief of at least `rho_b` and wins the `alpha` lottery; a good user turns
//! bad when it meets a good requester while believing at most `rho_g`. The
//! net change `Delta(rho_s)` is a polynomial of degree `M + 2` in `rho_s`,
//! kept in Bernstein form for stable evaluation on `[0, 1]`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::belief::{beta_tails, BeliefDistribution, Direction, TailQuery};
use crate::bernstein;
use crate::norm::{thresholds, Thresholds};
use crate::params::SystemParams;

/// Convergence tolerance on `|Delta|` for trajectories.
pub const TRAJECTORY_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_PERIODS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsState {
    pub rho_s: f64,
    pub period: u64,
}

/// The two reputation flows in one period, as population fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flows {
    /// Bad users restored to good.
    pub inflow: f64,
    /// Good users demoted to bad.
    pub outflow: f64,
}

impl Flows {
    pub fn net(&self) -> f64 {
        self.inflow - self.outflow
    }
}

/// Flows computed directly from the belief tails.
pub fn flows(rho_s: f64, params: &SystemParams) -> Flows {
    flows_with(rho_s, params, &thresholds(params))
}

pub(crate) fn flows_with(rho_s: f64, params: &SystemParams, t: &Thresholds) -> Flows {
    let dist = BeliefDistribution {
        social_reputation: rho_s,
        granularity: params.granularity(),
    };
    let comply_bad = if t.rho_b <= 1.0 {
        dist.tail(TailQuery::truncated(t.rho_b, Direction::AtLeast))
    } else {
        0.0
    };
    let defect_good = dist.tail(TailQuery::truncated(t.rho_g, Direction::AtMost));
    Flows {
        inflow: params.alpha() * (1.0 - rho_s) * rho_s * comply_bad,
        outflow: rho_s * rho_s * defect_good,
    }
}

/// One-period change of the social reputation.
pub fn delta(rho_s: f64, params: &SystemParams) -> f64 {
    flows(rho_s, params).net()
}

/// Exact derivative of [`delta`], from the polynomial form.
pub fn delta_derivative(rho_s: f64, params: &SystemParams) -> f64 {
    delta_poly(params).derivative(rho_s)
}

/// `Delta` as an explicit polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialForm {
    bernstein: Vec<f64>,
    derivative: Vec<f64>,
}

impl PolynomialForm {
    pub fn from_bernstein(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        let derivative = if coeffs.len() > 1 {
            bernstein::derivative(&coeffs)
        } else {
            vec![0.0]
        };
        Self {
            bernstein: coeffs,
            derivative,
        }
    }

    pub fn degree(&self) -> usize {
        self.bernstein.len() - 1
    }

    pub fn bernstein_coefficients(&self) -> &[f64] {
        &self.bernstein
    }

    /// Ascending monomial coefficients. Ill-conditioned for large degree.
    pub fn coefficients(&self) -> Vec<f64> {
        bernstein::to_monomial(&self.bernstein)
    }

    pub fn eval(&self, x: f64) -> f64 {
        bernstein::eval(&self.bernstein, x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        bernstein::eval(&self.derivative, x)
    }

    /// `p(x) / x`, defined when `p(0) = 0`. Its roots are the nonzero roots of `p`.
    pub fn deflated(&self) -> PolynomialForm {
        debug_assert_eq!(self.bernstein[0], 0.0);
        let n = self.degree();
        if n == 0 {
            return PolynomialForm::from_bernstein(vec![0.0]);
        }
        // x B(k, n-1) = (k + 1) / n B(k + 1, n)
        let coeffs = (0..n)
            .map(|k| self.bernstein[k + 1] * n as f64 / (k + 1) as f64)
            .collect();
        PolynomialForm::from_bernstein(coeffs)
    }

    /// Number of sign changes in the Bernstein coefficients, an upper bound
    /// on the number of roots in `(0, 1)`.
    pub fn sign_variations(&self) -> usize {
        let signs: Vec<f64> = self
            .bernstein
            .iter()
            .copied()
            .filter(|c| *c != 0.0)
            .map(f64::signum)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Expands `Delta` into Bernstein form of degree `M + 2`.
///
/// With `w_m` the binomial observation weights, the flows are
/// `alpha rho (1 - rho) sum_m w_m S_b(m)` and `rho^2 sum_m w_m (1 - S_g(m))`,
/// where `S_x(m)` is the integer beta tail at the threshold `x`. Multiplying
/// a degree-`M` Bernstein term by `rho (1 - rho)` or `rho^2` shifts it into
/// the degree-`M + 2` basis with a rational factor.
pub fn delta_poly(params: &SystemParams) -> PolynomialForm {
    let t = thresholds(params);
    let m = params.granularity();
    let comply_bad = if t.rho_b <= 1.0 {
        beta_tails(m, t.rho_b)
    } else {
        vec![0.0; m as usize + 1]
    };
    let comply_good = beta_tails(m, t.rho_g.min(1.0));

    let n = m as usize;
    let scale = ((n + 1) * (n + 2)) as f64;
    let mut coeffs = vec![0.0; n + 3];
    for j in 0..=n {
        let jf = j as f64;
        // C(M, j) / C(M + 2, j + 1)
        let mixed = (jf + 1.0) * ((n - j) as f64 + 1.0) / scale;
        // C(M, j) / C(M + 2, j + 2)
        let squared = (jf + 1.0) * (jf + 2.0) / scale;
        coeffs[j + 1] += params.alpha() * comply_bad[j] * mixed;
        coeffs[j + 2] -= (1.0 - comply_good[j]) * squared;
    }
    PolynomialForm::from_bernstein(coeffs)
}

/// One synchronous period of the mean-field map.
pub fn step(state: DynamicsState, params: &SystemParams) -> DynamicsState {
    let rho_s = state.rho_s + delta(state.rho_s, params);
    DynamicsState {
        rho_s: rho_s.clamp(0.0, 1.0),
        period: state.period + 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxPeriods,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub period: u64,
    pub rho_s: f64,
    pub inflow: f64,
    pub outflow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn final_state(&self) -> f64 {
        self.records.last().map(|r| r.rho_s).unwrap_or(f64::NAN)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "period,rho_s,inflow,outflow")?;
        for r in &self.records {
            writeln!(out, "{},{},{},{}", r.period, r.rho_s, r.inflow, r.outflow)?;
        }
        Ok(())
    }
}

/// Iterates the map from `rho_0` until `|Delta| < 1e-10` or `max_periods`.
///
/// Each record holds the state at the start of a period and the flows
/// during it.
pub fn trajectory(rho_0: f64, params: &SystemParams, max_periods: u64) -> Trajectory {
    let t = thresholds(params);
    let mut records = Vec::new();
    let mut rho_s = rho_0;
    for period in 0..=max_periods {
        let f = flows_with(rho_s, params, &t);
        records.push(TrajectoryRecord {
            period,
            rho_s,
            inflow: f.inflow,
            outflow: f.outflow,
        });
        if f.net().abs() < TRAJECTORY_TOL {
            return Trajectory {
                records,
                termination: Termination::Converged,
            };
        }
        if period == max_periods {
            break;
        }
        rho_s = (rho_s + f.net()).clamp(0.0, 1.0);
    }
    Trajectory {
        records,
        termination: Termination::MaxPeriods,
    }
}

/// Long-run state when every user knows `rho_s` exactly.
pub fn limit_map_unlimited(rho_0: f64, params: &SystemParams) -> f64 {
    let t = thresholds(params);
    if rho_0 >= t.rho_b {
        1.0
    } else if rho_0 <= t.rho_g {
        0.0
    } else {
        rho_0
    }
}
