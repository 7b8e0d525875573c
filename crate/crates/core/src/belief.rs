//! Heterogeneous beliefs induced by limited observations.
//!
//! A user samples `M` reputations, sees `m` good ones and holds a belief
//! drawn from the posterior `Beta(m + 1, M - m + 1)`. Since `m` is
//! binomial in the true social reputation, the population of beliefs
//! follows a beta-binomial mixture. With integer beta parameters both the
//! density and its tails are finite Bernstein sums, evaluated here in
//! closed form.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bernstein;
use crate::error::{ParamError, SearchError};
use crate::params::{check_probability, MAX_GRANULARITY};
use crate::quadrature::adaptive_simpson;

/// Belief mixture `f(. | rho_s)` for a population with granularity `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefDistribution {
    pub social_reputation: f64,
    pub granularity: u32,
}

impl BeliefDistribution {
    pub fn new(social_reputation: f64, granularity: u32) -> Result<Self, ParamError> {
        check_probability("social reputation", social_reputation)?;
        if granularity > MAX_GRANULARITY {
            return Err(ParamError::Granularity(granularity));
        }
        Ok(Self {
            social_reputation,
            granularity,
        })
    }

    /// Probability of observing `m` good users, for `m = 0..=M`.
    pub fn observation_weights(&self) -> Vec<f64> {
        bernstein::basis(self.granularity, self.social_reputation)
    }

    pub fn pdf(&self, rho: f64) -> f64 {
        belief_pdf(rho, self)
    }

    pub fn tail(&self, query: TailQuery) -> f64 {
        belief_tail(query, self)
    }

    /// Mass on `[lo, hi]` (clamped to `[0, 1]`).
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        if hi <= lo {
            return 0.0;
        }
        if lo == 0.0 && hi == 1.0 {
            return 1.0;
        }
        let above = |x: f64| self.tail(TailQuery::truncated(x, Direction::AtLeast));
        (above(lo) - above(hi)).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    AtLeast,
    AtMost,
}

/// Request for `Pr[rho >= x]` or `Pr[rho <= x]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailQuery {
    cutoff: f64,
    pub direction: Direction,
}

impl TailQuery {
    pub fn new(cutoff: f64, direction: Direction) -> Result<Self, ParamError> {
        check_probability("cutoff", cutoff)?;
        Ok(Self { cutoff, direction })
    }

    /// Clamps the cutoff into `[0, 1]`; infinite thresholds become 1.
    pub fn truncated(cutoff: f64, direction: Direction) -> Self {
        let cutoff = if cutoff.is_nan() { 1.0 } else { cutoff.clamp(0.0, 1.0) };
        Self { cutoff, direction }
    }

    pub fn at_least(cutoff: f64) -> Result<Self, ParamError> {
        Self::new(cutoff, Direction::AtLeast)
    }

    pub fn at_most(cutoff: f64) -> Result<Self, ParamError> {
        Self::new(cutoff, Direction::AtMost)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

/// Density of the belief mixture at `rho`.
///
/// The `Beta(m + 1, M - m + 1)` density equals `(M + 1) B(m, M; rho)`, so
/// the mixture is `(M + 1) sum_m B(m, M; rho_s) B(m, M; rho)`.
pub fn belief_pdf(rho: f64, dist: &BeliefDistribution) -> f64 {
    let n = dist.granularity;
    let weights = bernstein::basis(n, dist.social_reputation);
    let shapes = bernstein::basis(n, rho);
    let dot: f64 = weights.iter().zip(&shapes).map(|(w, s)| w * s).sum();
    (f64::from(n) + 1.0) * dot
}

/// `Pr[Beta(m + 1, M - m + 1) >= x]`, via the identity with the binomial
/// CDF `Pr[Binomial(M + 1, x) <= m]`.
pub fn beta_tail_int(m: u32, granularity: u32, x: f64) -> f64 {
    assert!(m <= granularity, "m = {m} exceeds M = {granularity}");
    let terms = bernstein::basis(granularity + 1, x);
    terms[..=m as usize].iter().sum::<f64>().min(1.0)
}

/// `beta_tail_int(m, M, x)` for every `m = 0..=M`.
pub fn beta_tails(granularity: u32, x: f64) -> Vec<f64> {
    let terms = bernstein::basis(granularity + 1, x);
    let mut acc = 0.0;
    terms[..=granularity as usize]
        .iter()
        .map(|t| {
            acc += t;
            acc.min(1.0)
        })
        .collect()
}

pub fn belief_tail(query: TailQuery, dist: &BeliefDistribution) -> f64 {
    let weights = dist.observation_weights();
    let tails = beta_tails(dist.granularity, query.cutoff);
    let at_least = weights
        .iter()
        .zip(&tails)
        .map(|(w, t)| w * t)
        .sum::<f64>()
        .clamp(0.0, 1.0);
    match query.direction {
        Direction::AtLeast => at_least,
        Direction::AtMost => 1.0 - at_least,
    }
}

/// Draws from `Beta(m + 1, M - m + 1)` as the `(m + 1)`-th smallest of
/// `M + 1` independent uniforms.
pub fn sample_posterior<R: Rng + ?Sized>(good_seen: u32, granularity: u32, rng: &mut R) -> f64 {
    debug_assert!(good_seen <= granularity);
    if granularity == 0 {
        return rng.gen::<f64>();
    }
    let mut draws: Vec<f64> = (0..=granularity).map(|_| rng.gen::<f64>()).collect();
    let (_, nth, _) = draws.select_nth_unstable_by(good_seen as usize, f64::total_cmp);
    *nth
}

/// Draws a belief: `m ~ Binomial(M, rho_s)` observations, then a posterior draw.
pub fn sample_belief<R: Rng + ?Sized>(dist: &BeliefDistribution, rng: &mut R) -> f64 {
    let good_seen = (0..dist.granularity)
        .filter(|_| rng.gen::<f64>() < dist.social_reputation)
        .count() as u32;
    sample_posterior(good_seen, dist.granularity, rng)
}

/// Result of [`concentration_m`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub granularity: u32,
    /// Mass on the interval from the closed-form tails.
    pub mass: f64,
    /// The same mass by adaptive quadrature of the density.
    pub quadrature_mass: f64,
}

pub const DEFAULT_CONCENTRATION_CAP: u32 = MAX_GRANULARITY;

/// Smallest granularity whose belief mixture puts at least `1 - epsilon`
/// of its mass within `delta` of `rho_s`.
///
/// Searches by doubling and then bisection, so it returns an `M` that meets
/// the target while `M - 1` does not.
pub fn concentration_m(
    social_reputation: f64,
    delta: f64,
    epsilon: f64,
    cap: u32,
) -> Result<Concentration, SearchError> {
    check_probability("social reputation", social_reputation)?;
    if delta.is_nan() || delta <= 0.0 {
        return Err(ParamError::Invalid(format!("delta must be positive, got {delta}")).into());
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ParamError::Invalid(format!("epsilon must lie in (0, 1), got {epsilon}")).into());
    }
    let cap = cap.min(MAX_GRANULARITY);
    let lo_edge = social_reputation - delta;
    let hi_edge = social_reputation + delta;
    let mass_at = |m: u32| {
        BeliefDistribution {
            social_reputation,
            granularity: m,
        }
        .interval_mass(lo_edge, hi_edge)
    };
    let target = 1.0 - epsilon;

    let found = if mass_at(0) >= target {
        0
    } else {
        let mut failing = 0u32;
        let mut probe = 1u32;
        loop {
            if mass_at(probe) >= target {
                break;
            }
            if probe >= cap {
                return Err(SearchError::CapExceeded { cap });
            }
            failing = probe;
            probe = (probe * 2).min(cap);
        }
        let mut passing = probe;
        while passing - failing > 1 {
            let mid = failing + (passing - failing) / 2;
            if mass_at(mid) >= target {
                passing = mid;
            } else {
                failing = mid;
            }
        }
        passing
    };

    let dist = BeliefDistribution {
        social_reputation,
        granularity: found,
    };
    let (a, b) = (lo_edge.max(0.0), hi_edge.min(1.0));
    Ok(Concentration {
        granularity: found,
        mass: mass_at(found),
        quadrature_mass: adaptive_simpson(|x| dist.pdf(x), a, b, 1e-10),
    })
}
