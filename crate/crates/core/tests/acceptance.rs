//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use normlab::abm::{compare_to_meanfield, run, SimConfig};
use normlab::belief::{belief_pdf, belief_tail};
use normlab::design::{min_feasible_alpha, optimal_alpha_m0, sweep, AlphaAxis, SweepAxes};
use normlab::dynamics::{limit_map_unlimited, trajectory, Termination};
use normlab::equilibrium::{bound_cor2, bounds_general, closed_form_m1, equilibria};
use normlab::norm::thresholds;
use normlab::quadrature::adaptive_simpson;
use normlab::value::long_run_value;
use normlab::{BeliefDistribution, Reputation, SystemParams, TailQuery};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

/// Root-finding tolerance; bounds that coincide with a root analytically
/// can only be matched to this precision.
const ROOT_TOL: f64 = 1e-12;

fn params(gamma: f64, beta: f64, alpha: f64, m: u32) -> SystemParams {
    SystemParams::new(gamma, beta, alpha, m).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn stable_roots(p: &SystemParams) -> Vec<f64> {
    equilibria(p).stable_roots().map(|r| r.rho_s).collect()
}

fn thresholds_correct() -> Outcome {
    let t = thresholds(&params(10.0, 0.25, 0.9, 0));
    let (g, b) = (0.75 / (0.25 * 9.1), 0.75 / (0.25 * 0.9 * 9.0));
    ensure((t.rho_g - g).abs() <= 1e-12 && (t.rho_b - b).abs() <= 1e-12, || format!("{t:?}"))?;
    ensure((t.rho_g - 0.329670).abs() < 1e-6 && (t.rho_b - 0.370370).abs() < 1e-6, || format!("{t:?}"))?;
    let t = thresholds(&params(5.0, 0.5, 1.0, 0));
    ensure((t.rho_g - 0.25).abs() <= 1e-12 && (t.rho_b - 0.25).abs() <= 1e-12, || format!("{t:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..1000 {
        let gamma = rng.gen_range(1.01..20.0);
        let beta = rng.gen_range(0.01..0.99);
        let alpha = if i % 10 == 0 { 1.0 } else { rng.gen_range(0.0..1.0) };
        let t = thresholds(&params(gamma, beta, alpha, 0));
        ensure(t.rho_g <= t.rho_b, || format!("order broken at {gamma} {beta} {alpha}"))?;
        ensure((t.rho_g == t.rho_b) == (alpha == 1.0), || format!("equality broken at {gamma} {beta} {alpha}"))?;
    }
    Ok("hand-evaluated values within 1e-12; ordering on 1000 random points".into())
}

fn value_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for beta in [0.25, 0.5, 0.75] {
        for gamma in [3.0, 5.0, 10.0] {
            for alpha in [0.5, 1.0] {
                let p = params(gamma, beta, alpha, 0);
                let t = thresholds(&p);
                let good = long_run_value(t.rho_g, &p).compliance_gain(Reputation::Good);
                let bad = long_run_value(t.rho_b, &p).compliance_gain(Reputation::Bad);
                worst = worst.max(good.abs()).max(bad.abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("largest compliance gain at a threshold {worst:e}"))?;
    Ok(format!("largest gain at a threshold {worst:.1e}"))
}

fn belief_engine() -> Outcome {
    let mut worst_norm: f64 = 0.0;
    let mut worst_tail: f64 = 0.0;
    for m in 0..=10 {
        for i in 0..=10 {
            let rho_s = i as f64 / 10.0;
            let d = BeliefDistribution::new(rho_s, m).unwrap();
            let mass = adaptive_simpson(|r| belief_pdf(r, &d), 0.0, 1.0, 1e-12);
            worst_norm = worst_norm.max((mass - 1.0).abs());
            for j in 0..=20 {
                let x = j as f64 / 20.0;
                let closed = belief_tail(TailQuery::at_least(x).unwrap(), &d);
                worst_tail = worst_tail.max((closed - common::mixture_tail(x, rho_s, m)).abs());
            }
        }
    }
    let mut worst_linear: f64 = 0.0;
    for i in 0..=10 {
        let rho_s = i as f64 / 10.0;
        let d = BeliefDistribution::new(rho_s, 1).unwrap();
        for j in 0..=100 {
            let rho = j as f64 / 100.0;
            let linear = 2.0 * (1.0 - rho_s + (2.0 * rho_s - 1.0) * rho);
            worst_linear = worst_linear.max((belief_pdf(rho, &d) - linear).abs());
        }
    }
    ensure(worst_norm <= 1e-8, || format!("normalization error {worst_norm:e}"))?;
    ensure(worst_tail <= 1e-10, || format!("tail error {worst_tail:e}"))?;
    ensure(worst_linear <= 1e-12, || format!("linear density error {worst_linear:e}"))?;
    Ok(format!(
        "normalization {worst_norm:.1e}, tails {worst_tail:.1e}, linear density {worst_linear:.1e}"
    ))
}

fn fine_grid_optimum(beta: f64, gamma: f64) -> (f64, f64) {
    let k = min_feasible_alpha(beta, gamma);
    (0..10_000)
        .map(|i| k + (1.0 - k) * i as f64 / 9_999.0)
        .map(|a| (a, common::m0_root(gamma, beta, a)))
        .fold((f64::NAN, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

fn uniform_beliefs() -> Outcome {
    let mut worst: f64 = 0.0;
    for beta in [0.25, 0.5, 0.75, 0.9] {
        for gamma in [1.5, 3.0, 5.0, 8.0, 10.0] {
            for alpha in [0.3, 0.6, 0.9, 1.0] {
                let (rho_g, rho_b) = common::thresholds(gamma, beta, alpha);
                if rho_b > 1.0 || rho_g > 1.0 {
                    continue;
                }
                let roots = stable_roots(&params(gamma, beta, alpha, 0));
                ensure(roots.len() == 1, || format!("{roots:?}"))?;
                worst = worst.max((roots[0] - common::m0_root(gamma, beta, alpha)).abs());
            }
        }
    }
    ensure(worst <= 1e-10, || format!("solver vs closed form {worst:e}"))?;

    let mut gaps = Vec::new();
    for (beta, gamma, interior) in [(0.9, 1.5, true), (0.95, 1.3, true), (0.5, 5.0, false), (0.25, 10.0, false)] {
        let design = optimal_alpha_m0(beta, gamma).unwrap();
        let alpha = design.alpha_star.unwrap();
        ensure((alpha < 1.0) == interior, || format!("branch at beta={beta} gamma={gamma}: alpha {alpha}"))?;
        let (_, best) = fine_grid_optimum(beta, gamma);
        let gap = (design.rho_star - best).abs();
        ensure(gap <= 1e-6, || format!("optimum gap {gap:e} at beta={beta} gamma={gamma}"))?;
        gaps.push(gap);
    }
    let d = optimal_alpha_m0(0.9, 1.5).unwrap();
    ensure(
        (d.alpha_star.unwrap() - 0.8611).abs() < 5e-5 && (d.rho_star - 0.786).abs() < 5e-4,
        || format!("interior case {:?} {}", d.alpha_star, d.rho_star),
    )?;
    Ok(format!(
        "root error {worst:.1e}; optimum gaps up to {:.1e}; interior alpha*={:.4} rho*={:.4}",
        gaps.iter().copied().fold(0.0, f64::max),
        d.alpha_star.unwrap(),
        d.rho_star
    ))
}

fn linear_beliefs() -> Outcome {
    let mut worst: f64 = 0.0;
    let (mut convex_cells, mut concave_cells) = (0, 0);
    for beta in [0.25, 0.5, 0.75] {
        for gamma in [3.0, 5.0, 8.0, 10.0] {
            for alpha in [0.3, 0.6, 0.9, 1.0] {
                let (rho_g, rho_b) = common::thresholds(gamma, beta, alpha);
                if rho_b > 1.0 || rho_g > 1.0 {
                    continue;
                }
                let oracle: Vec<f64> = common::m1_roots(gamma, beta, alpha)
                    .into_iter()
                    .filter(|(_, slope)| *slope < 0.0)
                    .map(|(r, _)| r)
                    .collect();
                let roots = stable_roots(&params(gamma, beta, alpha, 1));
                ensure(roots.len() == oracle.len(), || format!("{roots:?} vs {oracle:?}"))?;
                // The bounds presume a convex reduced quadratic; when it is
                // concave the same two values bracket the root in reverse.
                let convex = rho_g * (1.0 - rho_g) - alpha * rho_b * (1.0 - rho_b) >= 0.0;
                for (r, o) in roots.iter().zip(&oracle) {
                    worst = worst.max((r - o).abs());
                    let restore = alpha * (1.0 - rho_b).powi(2);
                    let first = restore / (alpha * (1.0 - rho_b) * (1.0 - 3.0 * rho_b) + rho_g * (2.0 - rho_g));
                    let second = restore / (restore + rho_g * rho_g);
                    let (lo, hi) = if convex {
                        convex_cells += 1;
                        (first, second)
                    } else {
                        concave_cells += 1;
                        (second, first)
                    };
                    ensure(lo <= *r + ROOT_TOL && *r <= hi + ROOT_TOL, || {
                        format!("beta={beta} gamma={gamma} alpha={alpha}: {lo} <= {r} <= {hi} fails")
                    })?;
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("solver vs quadratic {worst:e}"))?;
    let spot = closed_form_m1(&params(5.0, 0.5, 1.0, 1)).stable_root.unwrap();
    let solved = equilibria(&params(5.0, 0.5, 1.0, 1)).max_stable().unwrap();
    ensure((spot - 0.9).abs() <= 1e-10 && (solved - 0.9).abs() <= 1e-10, || format!("spot {spot} {solved}"))?;

    for gamma in [5.0, 10.0] {
        let k = min_feasible_alpha(0.5, gamma);
        let at_one = equilibria(&params(gamma, 0.5, 1.0, 1)).max_stable().unwrap();
        for i in 0..200 {
            let a = k + (1.0 - k) * i as f64 / 200.0;
            let v = equilibria(&params(gamma, 0.5, a, 1)).max_stable().unwrap_or(0.0);
            ensure(v <= at_one, || format!("gamma={gamma}: alpha {a} gives {v} > {at_one}"))?;
        }
    }
    Ok(format!(
        "root error {worst:.1e}; bounds hold in {convex_cells} convex cells, reversed in {concave_cells} concave cells; spot value {solved:.12}; alpha=1 maximal"
    ))
}

fn bound_containment() -> Outcome {
    let (mut roots, mut cells) = (0, 0);
    let mut tightest = f64::INFINITY;
    for beta in [0.25, 0.5, 0.75] {
        for gamma in [3.0, 5.0, 8.0] {
            for m in 0..=6u32 {
                for alpha in [0.3, 0.6, 0.9, 1.0] {
                    let p = params(gamma, beta, alpha, m);
                    let Ok((lo, hi)) = bounds_general(&p) else { continue };
                    cells += 1;
                    for r in stable_roots(&p).into_iter().filter(|r| *r > 0.0 && *r < 1.0) {
                        ensure(lo <= r + ROOT_TOL && r <= hi + ROOT_TOL, || format!("{p:?}: {lo} <= {r} <= {hi} fails"))?;
                        roots += 1;
                    }
                }
                let k = (1.0 - beta) / (beta * (gamma - 1.0));
                if k > 1.0 {
                    continue;
                }
                let p = params(gamma, beta, 1.0, m);
                let bound = 1.0 - k.powi(m as i32 + 1);
                ensure((bound - bound_cor2(&p)).abs() < 1e-15, || "bound formula".into())?;
                let optimum = equilibria(&p).max_stable().unwrap_or(0.0);
                ensure(optimum <= bound + ROOT_TOL, || format!("{p:?}: optimum {optimum} > bound {bound}"))?;
                tightest = tightest.min(bound - optimum);
            }
        }
    }
    Ok(format!("{roots} stable roots in {cells} cells; smallest bound slack {tightest:.1e}"))
}

fn bistability() -> Outcome {
    let p = params(8.0, 0.25, 0.9, 6);
    let roots = stable_roots(&p);
    ensure(roots.len() == 2, || format!("stable roots {roots:?}"))?;
    let low = trajectory(0.1, &p, 100_000);
    let high = trajectory(0.9, &p, 100_000);
    ensure(
        low.termination == Termination::Converged && high.termination == Termination::Converged,
        || "trajectory did not converge".into(),
    )?;
    let nearest = |x: f64| roots.iter().copied().min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs())).unwrap();
    let (l, h) = (low.final_state(), high.final_state());
    ensure((l - nearest(l)).abs() < 1e-6 && (h - nearest(h)).abs() < 1e-6, || format!("{l} {h}"))?;
    ensure(nearest(l) != nearest(h), || "both trajectories reach the same root".into())?;
    Ok(format!("stable roots {:.6} and {:.6}; limits {l:.6} and {h:.6}", roots[0], roots[1]))
}

fn limit_map() -> Outcome {
    let p = params(8.0, 0.25, 0.9, 0);
    let got: Vec<f64> = [0.3, 0.45, 0.6].iter().map(|&r| limit_map_unlimited(r, &p)).collect();
    ensure(got == [0.0, 0.45, 1.0], || format!("{got:?}"))?;
    Ok(format!("{got:?}"))
}

fn granularity_effect() -> Outcome {
    let alphas: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let table = sweep(&SweepAxes {
        beta: vec![0.5],
        gamma: vec![5.0],
        alpha: AlphaAxis::Values(alphas.clone()),
        granularity: (0..=8).collect(),
    })
    .map_err(|e| e.to_string())?;
    let value = |a: f64, m: u32| table.get(0.5, 5.0, Some(a), m).unwrap().max_stable_rho;
    let mut witness = None;
    'search: for &a in &alphas {
        for m in 0..=8 {
            for m2 in m + 1..=8 {
                if value(a, m2) < value(a, m) {
                    witness = Some((a, m, m2));
                    break 'search;
                }
            }
        }
    }
    let (a, m, m2) = witness.ok_or("no alpha where more observations hurt")?;
    let at_one: Vec<f64> = (0..=8).map(|m| value(1.0, m)).collect();
    ensure(at_one.windows(2).all(|w| w[1] >= w[0]), || format!("alpha=1 series {at_one:?}"))?;
    Ok(format!(
        "alpha={a}: M={m} gives {:.4} > M={m2} gives {:.4}; alpha=1 nondecreasing",
        value(a, m),
        value(a, m2)
    ))
}

fn abm_validation() -> Outcome {
    let mut notes = Vec::new();
    for (gamma, beta, alpha, m, target, seed) in [(10.0, 0.25, 0.9, 0, 0.6322, 11), (5.0, 0.5, 1.0, 1, 0.9, 12)] {
        let p = params(gamma, beta, alpha, m);
        let root = equilibria(&p).max_stable().unwrap();
        ensure((root - target).abs() < 1e-4, || format!("mean-field root {root}"))?;
        let config = SimConfig::new(p, 10_000, 500, 0.5, seed).unwrap().with_window(100).unwrap();
        let avg = run(&config).window_average();
        ensure((avg - root).abs() <= 0.03, || format!("M={m}: window average {avg} vs {root}"))?;

        let frozen = SimConfig::new(p, 100_000, 1, 0.5, seed + 100).unwrap();
        let check = compare_to_meanfield(&run(&frozen), &p).flows[0];
        let (zi, zo) = (check.inflow_z(), check.outflow_z());
        ensure(zi.abs() <= 3.0 && zo.abs() <= 3.0, || format!("M={m}: flow z-scores {zi:.2} {zo:.2}"))?;
        notes.push(format!("M={m} avg {avg:.4} vs {root:.4}, z {zi:.2}/{zo:.2}"));
    }
    Ok(notes.join("; "))
}

fn environment_effects() -> Outcome {
    let alphas: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
    let check = |beta: Vec<f64>, gamma: Vec<f64>| -> Result<Vec<f64>, String> {
        let table = sweep(&SweepAxes {
            beta: beta.clone(),
            gamma: gamma.clone(),
            alpha: AlphaAxis::Values(alphas.clone()),
            granularity: vec![1],
        })
        .map_err(|e| e.to_string())?;
        let mut best = Vec::new();
        for &b in &beta {
            for &g in &gamma {
                let at = |a: f64| table.get(b, g, Some(a), 1).unwrap().max_stable_rho;
                let top = alphas.iter().map(|&a| at(a)).fold(f64::NEG_INFINITY, f64::max);
                ensure(at(1.0) == top, || format!("beta={b} gamma={g}: alpha=1 is not the argmax"))?;
                best.push(top);
            }
        }
        ensure(best.windows(2).all(|w| w[1] >= w[0]), || format!("not monotone: {best:?}"))?;
        Ok(best)
    };
    let by_gamma = check(vec![0.5], vec![3.0, 4.0, 5.0, 6.0])?;
    let by_beta = check(vec![0.3, 0.5, 0.7, 0.9], vec![4.0])?;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    Ok(format!("gamma series {}; beta series {}", fmt(&by_gamma), fmt(&by_beta)))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("threshold correctness", Duration::from_secs(1), thresholds_correct),
        ("value-function oracle", Duration::from_secs(1), value_oracle),
        ("belief engine", Duration::from_secs(10), belief_engine),
        ("uniform-belief analytics", Duration::from_secs(5), uniform_beliefs),
        ("linear-belief analytics", Duration::from_secs(5), linear_beliefs),
        ("bound containment", Duration::from_secs(30), bound_containment),
        ("bistability", Duration::from_secs(5), bistability),
        ("perfect-information limit map", Duration::from_secs(1), limit_map),
        ("granularity effect", Duration::from_secs(30), granularity_effect),
        ("agent-based validation", Duration::from_secs(120), abm_validation),
        ("environment effects", Duration::from_secs(30), environment_effects),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{elapsed:.2?}]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{elapsed:.2?}]: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
