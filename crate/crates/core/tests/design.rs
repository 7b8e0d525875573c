mod common;

use normlab::design::{min_feasible_alpha, optimal_alpha_m0, optimize_alpha, sweep, AlphaAxis, SweepAxes};
use normlab::equilibrium::equilibria;
use normlab::norm::thresholds;
use normlab::SystemParams;

/// Independent maximization of the uniform-belief equilibrium over a fine
/// punishment grid.
fn m0_grid_max(beta: f64, gamma: f64, n: usize) -> (f64, f64) {
    let k = min_feasible_alpha(beta, gamma);
    (0..=n)
        .map(|i| k + (1.0 - k) * i as f64 / n as f64)
        .map(|a| (a, common::m0_root(gamma, beta, a)))
        .fold((f64::NAN, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

#[test]
fn uniform_belief_optimum_matches_fine_grid() {
    for &(beta, gamma) in &[(0.9, 1.5), (0.5, 5.0), (0.25, 10.0), (0.75, 3.0), (0.9, 3.0)] {
        let closed = optimal_alpha_m0(beta, gamma).unwrap();
        let (a, r) = m0_grid_max(beta, gamma, 10_000);
        assert!((closed.rho_star - r).abs() < 1e-6, "beta={beta} gamma={gamma}");
        assert!((closed.alpha_star.unwrap() - a).abs() < 1e-3);
    }
    let interior = optimal_alpha_m0(0.9, 1.5).unwrap();
    assert!((interior.alpha_star.unwrap() - 0.8611).abs() < 1e-4);
    assert!((interior.rho_star - 0.786).abs() < 1e-3);
}

fn stable_m1(gamma: f64, beta: f64, alpha: f64) -> f64 {
    common::m1_roots(gamma, beta, alpha)
        .into_iter()
        .filter(|(_, slope)| *slope < 0.0)
        .map(|(r, _)| r)
        .fold(0.0, f64::max)
}

#[test]
fn grid_search_agrees_with_closed_forms() {
    for beta in [0.25, 0.5, 0.75, 0.9] {
        for gamma in [1.5, 3.0, 5.0, 10.0] {
            if min_feasible_alpha(beta, gamma) > 1.0 {
                assert!(optimize_alpha(beta, gamma, 0, 64).unwrap().infeasible);
                continue;
            }
            let m0 = optimize_alpha(beta, gamma, 0, 512).unwrap();
            let closed = optimal_alpha_m0(beta, gamma).unwrap();
            assert!((m0.grid_rho_star.unwrap() - closed.rho_star).abs() <= 1e-6, "M=0 beta={beta} gamma={gamma}");

            let m1 = optimize_alpha(beta, gamma, 1, 512).unwrap();
            let at_one = stable_m1(gamma, beta, 1.0);
            if (beta, gamma) == (0.9, 1.5) {
                // Small benefit ratio: a harsher punishment beats the mildest one.
                let a = m1.alpha_star.unwrap();
                let at_best = stable_m1(gamma, beta, a);
                assert!(a < 0.7 && at_best > at_one + 1e-3);
                assert!((at_best - m1.rho_star).abs() <= 1e-9);
            } else {
                assert!((m1.grid_rho_star.unwrap() - at_one).abs() <= 1e-6, "M=1 beta={beta} gamma={gamma}");
            }
        }
    }
}

#[test]
fn optimal_punishment_restores_bad_users() {
    for beta in [0.25, 0.5, 0.75, 0.9] {
        for gamma in [1.5, 3.0, 5.0, 10.0] {
            for m in 0..=3 {
                let d = optimize_alpha(beta, gamma, m, 64).unwrap();
                if let Some(a) = d.alpha_star {
                    let p = SystemParams::new(gamma, beta, a, m).unwrap();
                    assert!(thresholds(&p).rho_b <= 1.0 + 1e-12);
                }
            }
        }
    }
}

fn best_over_alpha(beta: f64, gamma: f64) -> (f64, f64) {
    (1..=20)
        .map(|i| i as f64 / 20.0)
        .map(|a| {
            let p = SystemParams::new(gamma, beta, a, 1).unwrap();
            (a, equilibria(&p).max_stable().unwrap_or(0.0))
        })
        .fold((f64::NAN, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

#[test]
fn environment_effects_are_monotone() {
    let by_gamma: Vec<(f64, f64)> = [3.0, 4.0, 5.0, 6.0].iter().map(|&g| best_over_alpha(0.5, g)).collect();
    let by_beta: Vec<(f64, f64)> = [0.3, 0.5, 0.7, 0.9].iter().map(|&b| best_over_alpha(b, 4.0)).collect();
    for series in [&by_gamma, &by_beta] {
        assert!(series.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(series.iter().all(|(a, _)| *a == 1.0));
    }
}

#[test]
fn sweep_orders_cells_and_matches_direct_solves() {
    let table = sweep(&SweepAxes {
        beta: vec![0.25, 0.5],
        gamma: vec![5.0, 10.0],
        alpha: AlphaAxis::Values(vec![0.5, 1.0]),
        granularity: vec![0, 2],
    })
    .unwrap();
    assert_eq!(table.cells.len(), 16);
    let order: Vec<(f64, f64, Option<f64>, u32)> =
        table.cells.iter().map(|c| (c.beta, c.gamma, c.alpha, c.granularity)).collect();
    assert_eq!(order[0], (0.25, 5.0, Some(0.5), 0));
    assert_eq!(order[1], (0.25, 5.0, Some(0.5), 2));
    assert_eq!(order[2], (0.25, 5.0, Some(1.0), 0));
    assert_eq!(order[15], (0.5, 10.0, Some(1.0), 2));
    for c in &table.cells {
        let p = SystemParams::new(c.gamma, c.beta, c.alpha.unwrap(), c.granularity).unwrap();
        assert_eq!(c.max_stable_rho, equilibria(&p).max_stable().unwrap_or(0.0));
    }
}
