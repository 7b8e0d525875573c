//! Oracles built from first principles, independent of the library code
//! paths they check. Only the generic quadrature routine is shared.
#![allow(dead_code)]

use normlab::quadrature::adaptive_simpson;

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub fn choose(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Density of `Beta(m + 1, M - m + 1)` from factorials.
pub fn beta_density(m: u32, big_m: u32, x: f64) -> f64 {
    factorial(big_m + 1) / (factorial(m) * factorial(big_m - m)) * x.powi(m as i32) * (1.0 - x).powi((big_m - m) as i32)
}

/// Binomial mixture of posterior densities.
pub fn mixture_pdf(rho: f64, rho_s: f64, big_m: u32) -> f64 {
    (0..=big_m)
        .map(|m| {
            choose(big_m, m) * rho_s.powi(m as i32) * (1.0 - rho_s).powi((big_m - m) as i32) * beta_density(m, big_m, rho)
        })
        .sum()
}

/// `Pr[belief >= x]` by quadrature of the mixture density.
pub fn mixture_tail(x: f64, rho_s: f64, big_m: u32) -> f64 {
    if x >= 1.0 {
        return 0.0;
    }
    adaptive_simpson(|r| mixture_pdf(r, rho_s, big_m), x.max(0.0), 1.0, 1e-13)
}

/// Threshold beliefs written out by hand.
pub fn thresholds(gamma: f64, beta: f64, alpha: f64) -> (f64, f64) {
    let rho_g = if gamma > alpha { (1.0 - beta) / (beta * (gamma - alpha)) } else { f64::INFINITY };
    let rho_b = if alpha > 0.0 { (1.0 - beta) / (beta * alpha * (gamma - 1.0)) } else { f64::INFINITY };
    (rho_g, rho_b)
}

/// Net one-period change of the good fraction from the mixture density.
pub fn delta(rho_s: f64, gamma: f64, beta: f64, alpha: f64, big_m: u32) -> f64 {
    let (rho_g, rho_b) = thresholds(gamma, beta, alpha);
    let comply_bad = mixture_tail(rho_b, rho_s, big_m);
    let defect_good = 1.0 - mixture_tail(rho_g, rho_s, big_m);
    alpha * (1.0 - rho_s) * rho_s * comply_bad - rho_s * rho_s * defect_good
}

/// Stable interior equilibrium for uniform beliefs: zero of
/// `alpha (1 - rho) (1 - rho_b) - rho rho_g`.
pub fn m0_root(gamma: f64, beta: f64, alpha: f64) -> f64 {
    let (rho_g, rho_b) = thresholds(gamma, beta, alpha);
    let r = alpha * (1.0 - rho_b);
    r / (r + rho_g)
}

/// Tail of the linear belief density `2 (1 - s + (2 s - 1) rho)` at `x`.
fn linear_tail(x: f64, s: f64) -> f64 {
    if x >= 1.0 {
        return 0.0;
    }
    (1.0 - x) * (2.0 * (1.0 - s) + (2.0 * s - 1.0) * (1.0 + x))
}

/// `Delta / rho_s` for one observation; a quadratic in `rho_s`.
pub fn m1_reduced(s: f64, gamma: f64, beta: f64, alpha: f64) -> f64 {
    let (rho_g, rho_b) = thresholds(gamma, beta, alpha);
    alpha * (1.0 - s) * linear_tail(rho_b, s) - s * (1.0 - linear_tail(rho_g, s))
}

/// Roots in `(0, 1)` of the reduced quadratic with the sign of its slope,
/// from an exact interpolation through three points.
pub fn m1_roots(gamma: f64, beta: f64, alpha: f64) -> Vec<(f64, f64)> {
    let g0 = m1_reduced(0.0, gamma, beta, alpha);
    let gh = m1_reduced(0.5, gamma, beta, alpha);
    let g1 = m1_reduced(1.0, gamma, beta, alpha);
    let c2 = 2.0 * g1 - 4.0 * gh + 2.0 * g0;
    let c1 = g1 - g0 - c2;
    let c0 = g0;
    let mut roots = Vec::new();
    if c2.abs() < 1e-14 {
        if c1 != 0.0 {
            roots.push(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            roots.push((-c1 + disc.sqrt()) / (2.0 * c2));
            roots.push((-c1 - disc.sqrt()) / (2.0 * c2));
        }
    }
    roots
        .into_iter()
        .filter(|r| *r > 0.0 && *r < 1.0)
        .map(|r| (r, c1 + 2.0 * c2 * r))
        .collect()
}
