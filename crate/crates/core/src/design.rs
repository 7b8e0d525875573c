//! Choosing the punishment probability.
//!
//! The designer picks `alpha` to maximize the stable social reputation.
//! `alpha` is only useful when bad users can be restored, i.e. when
//! `rho_b(alpha) <= 1`, which means `alpha >= (1 - beta) / (beta (gamma - 1))`.
//! When several stable equilibria coexist the largest one is maximized.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{closed_form_m1, equilibria};
use crate::error::ParamError;
use crate::norm::thresholds;
use crate::params::SystemParams;

pub const DEFAULT_ALPHA_GRID: usize = 512;
const GOLDEN_TOL: f64 = 1e-10;
const CROSS_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignMethod {
    ClosedFormM0,
    ClosedFormM1,
    GridSearch,
}

/// Stable equilibria at one punishment level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaProfile {
    pub alpha: f64,
    pub stable_roots: Vec<f64>,
}

impl AlphaProfile {
    pub fn max_stable(&self) -> f64 {
        self.stable_roots.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub alpha_star: Option<f64>,
    pub rho_star: f64,
    pub method: DesignMethod,
    /// `[alpha_min, 1]` on which bad users can be restored.
    pub feasible_alpha_range: Option<(f64, f64)>,
    pub infeasible: bool,
    /// False when `rho_star` comes from a large-benefit approximation.
    pub exact: bool,
    /// Optimum found by the grid search, when one was run.
    pub grid_rho_star: Option<f64>,
    /// `|grid - closed form|` for the optimum, when both were computed.
    pub cross_check_gap: Option<f64>,
    /// Stable equilibria at every grid punishment level.
    pub profile: Vec<AlphaProfile>,
}

impl DesignResult {
    fn infeasible(method: DesignMethod) -> Self {
        Self {
            alpha_star: None,
            rho_star: 0.0,
            method,
            feasible_alpha_range: None,
            infeasible: true,
            exact: true,
            grid_rho_star: None,
            cross_check_gap: None,
            profile: Vec::new(),
        }
    }
}

/// Smallest `alpha` with `rho_b(alpha) <= 1`.
pub fn min_feasible_alpha(beta: f64, gamma: f64) -> f64 {
    (1.0 - beta) / (beta * (gamma - 1.0))
}

fn feasible_range(beta: f64, gamma: f64) -> Option<(f64, f64)> {
    let lo = min_feasible_alpha(beta, gamma);
    (lo <= 1.0).then_some((lo, 1.0))
}

fn profile_at(base: &SystemParams, alpha: f64) -> AlphaProfile {
    let p = base.with_alpha(alpha).expect("alpha inside [0, 1]");
    AlphaProfile {
        alpha,
        stable_roots: equilibria(&p).stable_roots().map(|r| r.rho_s).collect(),
    }
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid search over the feasible punishment range followed by golden-section
/// refinement inside the winning bracket.
fn grid_search(base: &SystemParams, lo: f64, grid_n: usize) -> (f64, f64, Vec<AlphaProfile>) {
    let n = grid_n.max(2);
    let alphas: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { 1.0 } else { lo + (1.0 - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    let profile: Vec<AlphaProfile> = alphas.par_iter().map(|&a| profile_at(base, a)).collect();

    let (best_idx, best) = profile
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, p)| {
            let v = p.max_stable();
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let left = alphas[best_idx.saturating_sub(1)];
    let right = alphas[(best_idx + 1).min(n - 1)];
    let (alpha, value) = golden_section_max(|a| profile_at(base, a).max_stable(), left, right, GOLDEN_TOL);
    if value > best {
        (alpha, value, profile)
    } else {
        (alphas[best_idx], best, profile)
    }
}

pub fn optimize_alpha(beta: f64, gamma: f64, granularity: u32, grid_n: usize) -> Result<DesignResult, ParamError> {
    let base = SystemParams::new(gamma, beta, 1.0, granularity)?;
    let Some(range) = feasible_range(beta, gamma) else {
        return Ok(DesignResult::infeasible(DesignMethod::GridSearch));
    };
    let (grid_alpha, grid_rho, profile) = grid_search(&base, range.0, grid_n);

    let mut result = DesignResult {
        alpha_star: Some(grid_alpha),
        rho_star: grid_rho,
        method: DesignMethod::GridSearch,
        feasible_alpha_range: Some(range),
        infeasible: false,
        exact: true,
        grid_rho_star: Some(grid_rho),
        cross_check_gap: None,
        profile,
    };
    match granularity {
        0 => {
            let closed = optimal_alpha_m0(beta, gamma)?;
            let gap = (closed.rho_star - grid_rho).abs();
            result.cross_check_gap = Some(gap);
            if gap <= CROSS_CHECK_TOL {
                result.alpha_star = closed.alpha_star;
                result.rho_star = closed.rho_star;
                result.method = DesignMethod::ClosedFormM0;
            }
        }
        1 if grid_alpha == 1.0 => {
            // Mildest punishment wins; its equilibrium solves a quadratic exactly.
            if let Some(root) = closed_form_m1(&base).stable_root {
                result.cross_check_gap = Some((root - grid_rho).abs());
                if (root - grid_rho).abs() <= CROSS_CHECK_TOL {
                    result.rho_star = root;
                    result.method = DesignMethod::ClosedFormM1;
                }
            }
        }
        _ => {}
    }
    if result.rho_star <= 0.0 {
        result.infeasible = true;
    }
    Ok(result)
}

/// Optimal punishment for uniform beliefs (`M = 0`).
pub fn optimal_alpha_m0(beta: f64, gamma: f64) -> Result<DesignResult, ParamError> {
    SystemParams::new(gamma, beta, 1.0, 0)?;
    let Some(range) = feasible_range(beta, gamma) else {
        return Ok(DesignResult::infeasible(DesignMethod::ClosedFormM0));
    };
    let k = min_feasible_alpha(beta, gamma);
    let interior = (gamma * beta * (gamma - 1.0) + 1.0 - beta) / (2.0 * beta * (gamma - 1.0));
    let (alpha_star, rho_star) = if interior < 1.0 {
        let spread = 0.25 * (gamma - k).powi(2);
        (interior, spread / (spread + (1.0 - beta) / beta))
    } else {
        (1.0, 1.0 - k)
    };
    Ok(DesignResult {
        alpha_star: Some(alpha_star),
        rho_star,
        method: DesignMethod::ClosedFormM0,
        feasible_alpha_range: Some(range),
        infeasible: false,
        exact: true,
        grid_rho_star: None,
        cross_check_gap: None,
        profile: Vec::new(),
    })
}

/// Mildest punishment and its equilibrium for linear beliefs (`M = 1`),
/// using the large-benefit threshold approximations.
pub fn optimal_alpha_m1(beta: f64, gamma: f64) -> Result<DesignResult, ParamError> {
    SystemParams::new(gamma, beta, 1.0, 1)?;
    let x = (1.0 - beta) / (beta * gamma);
    let keep = (1.0 - x).powi(2);
    let range = feasible_range(beta, gamma);
    Ok(DesignResult {
        alpha_star: Some(1.0),
        rho_star: keep / (keep + x * x),
        method: DesignMethod::ClosedFormM1,
        feasible_alpha_range: range,
        infeasible: range.is_none(),
        exact: false,
        grid_rho_star: None,
        cross_check_gap: None,
        profile: Vec::new(),
    })
}

/// Punishment axis of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlphaAxis {
    Values(Vec<f64>),
    /// Optimize `alpha` per cell on a grid of this many points.
    Optimize(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxes {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub alpha: AlphaAxis,
    pub granularity: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub beta: f64,
    pub gamma: f64,
    pub granularity: u32,
    /// The fixed punishment, or the optimizer's choice.
    pub alpha: Option<f64>,
    pub max_stable_rho: f64,
    /// Bad users can be restored at this punishment level.
    pub feasible: bool,
    pub stable_roots: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axes: SweepAxes,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "beta,gamma,M,max_stable_rho,alpha,feasible")?;
        for c in &self.cells {
            let alpha = c.alpha.map(|a| a.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                c.beta, c.gamma, c.granularity, c.max_stable_rho, alpha, c.feasible
            )?;
        }
        Ok(())
    }

    /// Cell for an exact parameter tuple.
    pub fn get(&self, beta: f64, gamma: f64, alpha: Option<f64>, granularity: u32) -> Option<&SweepCell> {
        self.cells.iter().find(|c| {
            c.beta == beta && c.gamma == gamma && c.granularity == granularity && (alpha.is_none() || c.alpha == alpha)
        })
    }
}

/// Evaluates every parameter tuple; cells are ordered beta, gamma, alpha,
/// `M` from outermost to innermost.
pub fn sweep(axes: &SweepAxes) -> Result<SweepTable, ParamError> {
    let alphas: Vec<Option<f64>> = match &axes.alpha {
        AlphaAxis::Values(v) => v.iter().copied().map(Some).collect(),
        AlphaAxis::Optimize(_) => vec![None],
    };
    let mut tuples = Vec::new();
    for &beta in &axes.beta {
        for &gamma in &axes.gamma {
            for &alpha in &alphas {
                for &m in &axes.granularity {
                    SystemParams::new(gamma, beta, alpha.unwrap_or(1.0), m)?;
                    tuples.push((beta, gamma, alpha, m));
                }
            }
        }
    }
    let cells = tuples
        .par_iter()
        .map(|&(beta, gamma, alpha, m)| match (alpha, &axes.alpha) {
            (Some(a), _) => {
                let p = SystemParams::new(gamma, beta, a, m).expect("validated above");
                let report = equilibria(&p);
                let stable_roots: Vec<f64> = report.stable_roots().map(|r| r.rho_s).collect();
                SweepCell {
                    beta,
                    gamma,
                    granularity: m,
                    alpha: Some(a),
                    max_stable_rho: report.max_stable().unwrap_or(0.0),
                    feasible: thresholds(&p).restorable(),
                    stable_roots,
                }
            }
            (None, AlphaAxis::Optimize(grid_n)) => {
                let design = optimize_alpha(beta, gamma, m, *grid_n).expect("validated above");
                let stable_roots = design
                    .alpha_star
                    .map(|a| profile_at(&SystemParams::new(gamma, beta, a, m).expect("validated"), a).stable_roots)
                    .unwrap_or_default();
                SweepCell {
                    beta,
                    gamma,
                    granularity: m,
                    alpha: design.alpha_star,
                    max_stable_rho: design.rho_star,
                    feasible: !design.infeasible,
                    stable_roots,
                }
            }
            (None, AlphaAxis::Values(_)) => unreachable!("fixed axis always yields a value"),
        })
        .collect();
    Ok(SweepTable {
        axes: axes.clone(),
        cells,
    })
}
