//! Equilibria of the mean-field dynamics and their analytic bounds.
//!
//! An equilibrium is a root of `Delta` in `[0, 1]`; it is stable when
//! `Delta` crosses zero downwards. `rho_s = 0` is always a root. Interior
//! roots are bracketed on a uniform grid and refined by bisection on the
//! deflated polynomial `g = Delta / rho_s`, which shares them but does not
//! vanish at the origin.

use serde::{Deserialize, Serialize};

use crate::dynamics::{delta_poly, PolynomialForm};
use crate::error::{ParamError, SearchError};
use crate::norm::{thresholds, Thresholds};
use crate::params::SystemParams;

pub const DEFAULT_GRID_N: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-12;
/// Derivatives with magnitude at most this are reported as marginal.
pub const DERIVATIVE_TOL: f64 = 1e-12;
pub const MIN_GRID_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub rho_s: f64,
    pub stable: bool,
    pub derivative: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    /// General lower bound, absent when a threshold exceeds 1.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Large-benefit upper bound, evaluated unconditionally.
    pub cor2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub params: SystemParams,
    pub thresholds: Thresholds,
    pub roots: Vec<Root>,
    pub bounds: Bounds,
    /// Closed-form stable equilibrium, for `M` in {0, 1} when bad users can
    /// be restored.
    pub closed_form: Option<f64>,
}

impl EquilibriumReport {
    pub fn stable_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.stable)
    }

    /// Largest stable equilibrium.
    pub fn max_stable(&self) -> Option<f64> {
        self.stable_roots().map(|r| r.rho_s).reduce(f64::max)
    }

    /// Stable root closest to `rho_s`.
    pub fn nearest_stable(&self, rho_s: f64) -> Option<f64> {
        self.stable_roots()
            .map(|r| r.rho_s)
            .min_by(|a, b| (a - rho_s).abs().total_cmp(&(b - rho_s).abs()))
    }
}

fn classify(derivative: f64, tol: f64) -> Stability {
    if derivative < -tol {
        Stability::Stable
    } else if derivative > tol {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

/// Sign of `p` on `(0, eps)` from its lowest nonzero Bernstein coefficient.
fn sign_right_of_origin(p: &PolynomialForm) -> f64 {
    p.bernstein_coefficients()
        .iter()
        .find(|c| **c != 0.0)
        .map_or(0.0, |c| c.signum())
}

fn bisect(g: &PolynomialForm, mut lo: f64, mut hi: f64, mut g_lo: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g.eval(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All roots of `Delta` in `[0, 1]` with their stability.
pub fn find_equilibria(
    params: &SystemParams,
    grid_n: usize,
    tol: f64,
) -> Result<EquilibriumReport, ParamError> {
    if grid_n < MIN_GRID_N {
        return Err(ParamError::Invalid(format!("grid must have at least {MIN_GRID_N} cells, got {grid_n}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(ParamError::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let poly = delta_poly(params);
    let g = poly.deflated();

    // The origin is a boundary root: a flat derivative there is resolved by
    // the sign of Delta immediately to its right.
    let d0 = poly.derivative(0.0);
    let origin_stability = match classify(d0, DERIVATIVE_TOL) {
        Stability::Marginal => match sign_right_of_origin(&g) {
            s if s < 0.0 => Stability::Stable,
            s if s > 0.0 => Stability::Unstable,
            _ => Stability::Marginal,
        },
        s => s,
    };
    let mut roots = vec![Root {
        rho_s: 0.0,
        stable: origin_stability == Stability::Stable,
        derivative: d0,
        stability: origin_stability,
    }];

    let mut interior = Vec::new();
    let step = 1.0 / grid_n as f64;
    let mut x_prev = 0.0;
    let mut g_prev = g.eval(0.0);
    for i in 1..=grid_n {
        let x = if i == grid_n { 1.0 } else { i as f64 * step };
        let gx = g.eval(x);
        if gx == 0.0 {
            interior.push(x);
        } else if g_prev != 0.0 && (gx < 0.0) != (g_prev < 0.0) {
            interior.push(bisect(&g, x_prev, x, g_prev, tol));
        }
        x_prev = x;
        g_prev = gx;
    }

    for r in interior {
        let last = roots.last().map_or(f64::NEG_INFINITY, |root: &Root| root.rho_s);
        if r - last <= 10.0 * tol {
            continue;
        }
        let derivative = poly.derivative(r);
        let stability = classify(derivative, DERIVATIVE_TOL);
        roots.push(Root {
            rho_s: r,
            stable: stability == Stability::Stable,
            derivative,
            stability,
        });
    }

    let t = thresholds(params);
    let (lower, upper) = match bounds_general(params) {
        Ok((lo, hi)) => (Some(lo), Some(hi)),
        Err(_) => (None, None),
    };
    let closed_form = match params.granularity() {
        0 => closed_form_m0(params).ok(),
        1 => closed_form_m1(params).stable_root,
        _ => None,
    };
    Ok(EquilibriumReport {
        params: *params,
        thresholds: t,
        roots,
        bounds: Bounds {
            lower,
            upper,
            cor2: bound_cor2(params),
        },
        closed_form,
    })
}

/// [`find_equilibria`] with the default grid and tolerance.
pub fn equilibria(params: &SystemParams) -> EquilibriumReport {
    find_equilibria(params, DEFAULT_GRID_N, DEFAULT_TOL).expect("default solver settings are valid")
}

/// Bounds on any stable interior equilibrium, valid when both thresholds
/// are at most 1.
pub fn bounds_general(params: &SystemParams) -> Result<(f64, f64), SearchError> {
    let t = thresholds(params);
    if t.rho_g > 1.0 || t.rho_b > 1.0 {
        return Err(SearchError::NotApplicable);
    }
    let alpha = params.alpha();
    let e = params.granularity() as i32 + 1;
    let restore_low = alpha * (1.0 - t.rho_b).powi(e);
    let defect_low = 1.0 - (1.0 - t.rho_g).powi(e);
    let restore_high = alpha * (1.0 - t.rho_b.powi(e));
    let defect_high = t.rho_g.powi(e);
    let lower = restore_low / (restore_low + defect_low);
    let upper = restore_high / (restore_high + defect_high);
    Ok((lower, upper))
}

/// Upper bound `1 - ((1 - beta) / (beta (gamma - 1)))^(M + 1)`, derived for
/// large benefit-to-cost ratios.
pub fn bound_cor2(params: &SystemParams) -> f64 {
    let k = (1.0 - params.beta()) / (params.beta() * (params.gamma() - 1.0));
    1.0 - k.powi(params.granularity() as i32 + 1)
}

/// Stable equilibrium for uniform beliefs (`M = 0`).
pub fn closed_form_m0(params: &SystemParams) -> Result<f64, SearchError> {
    if params.granularity() != 0 {
        return Err(ParamError::Invalid("closed form requires M = 0".into()).into());
    }
    let t = thresholds(params);
    if t.rho_b > 1.0 {
        return Err(SearchError::NotApplicable);
    }
    let restore = params.alpha() * (1.0 - t.rho_b);
    Ok(restore / (restore + t.rho_g))
}

/// Closed-form analysis of the linear-belief case (`M = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBeliefSolution {
    /// Ascending coefficients of the quadratic `g = Delta / rho_s`.
    pub g_coefficients: [f64; 3],
    /// Roots of `g` in `(0, 1)`, ascending.
    pub roots: Vec<f64>,
    /// The root at which `g` decreases.
    pub stable_root: Option<f64>,
    /// Convex-hull bounds evaluated with the exact thresholds.
    pub bounds_exact: Option<(f64, f64)>,
    /// The same bounds with the large-benefit threshold approximations.
    pub bounds_large_gamma: Option<(f64, f64)>,
}

fn linear_belief_bounds(alpha: f64, rho_g: f64, rho_b: f64) -> Option<(f64, f64)> {
    if !(rho_b <= 1.0 && rho_g <= 1.0) {
        return None;
    }
    let top = alpha * (1.0 - rho_b).powi(2);
    let lower = top / (alpha * (1.0 - rho_b) * (1.0 - 3.0 * rho_b) + rho_g * (2.0 - rho_g));
    let upper = top / (top + rho_g * rho_g);
    Some((lower, upper))
}

fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if c2.abs() <= 1e-14 * scale {
        return if c1 != 0.0 { vec![-c0 / c1] } else { Vec::new() };
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let mut roots = if q == 0.0 {
        vec![0.0]
    } else {
        vec![q / c2, c0 / q]
    };
    roots.sort_by(f64::total_cmp);
    roots
}

pub fn closed_form_m1(params: &SystemParams) -> LinearBeliefSolution {
    let t = thresholds(params);
    let alpha = params.alpha();
    // Tail of the restoring belief: (1 - rho_b)^2 + 2 rho_b (1 - rho_b) rho_s.
    let (a, b) = if t.rho_b <= 1.0 {
        ((1.0 - t.rho_b).powi(2), 2.0 * t.rho_b * (1.0 - t.rho_b))
    } else {
        (0.0, 0.0)
    };
    // Head of the defecting belief: rho_g (2 - rho_g) - 2 rho_g (1 - rho_g) rho_s.
    let (c, d) = if t.rho_g <= 1.0 {
        (t.rho_g * (2.0 - t.rho_g), 2.0 * t.rho_g * (1.0 - t.rho_g))
    } else {
        (1.0, 0.0)
    };
    let coeffs = [alpha * a, alpha * (b - a) - c, d - alpha * b];
    let roots: Vec<f64> = quadratic_roots(coeffs[0], coeffs[1], coeffs[2])
        .into_iter()
        .filter(|r| *r > 0.0 && *r < 1.0)
        .collect();
    let slope = |x: f64| coeffs[1] + 2.0 * coeffs[2] * x;
    let stable_root = roots.iter().copied().find(|r| slope(*r) < 0.0);

    let approx_g = (1.0 - params.beta()) / (params.beta() * params.gamma());
    let approx_b = if alpha > 0.0 { approx_g / alpha } else { f64::INFINITY };
    LinearBeliefSolution {
        g_coefficients: coeffs,
        roots,
        stable_root,
        bounds_exact: linear_belief_bounds(alpha, t.rho_g, t.rho_b),
        bounds_large_gamma: linear_belief_bounds(alpha, approx_g, approx_b),
    }
}
