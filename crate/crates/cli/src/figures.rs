//! Preconfigured data sets, one plotted series per column.

use serde_json::{json, Map, Value};

use normlab::design::optimize_alpha;
use normlab::dynamics::{limit_map_unlimited, step};
use normlab::equilibrium::{bound_cor2, equilibria};
use normlab::{DynamicsState, SystemParams};

use crate::args::Figure;
use crate::output::{num, opt, Artifact, Table};

const FIG7_ALPHA_GRID: usize = 128;

fn params(gamma: f64, beta: f64, alpha: f64, m: u32) -> SystemParams {
    SystemParams::new(gamma, beta, alpha, m).expect("figure parameters are valid")
}

fn path(rho_0: f64, p: &SystemParams, periods: u64) -> Vec<f64> {
    let mut state = DynamicsState { rho_s: rho_0, period: 0 };
    let mut out = vec![rho_0];
    for _ in 0..periods {
        state = step(state, p);
        out.push(state.rho_s);
    }
    out
}

fn trajectories(series: &[(String, SystemParams, f64)], periods: u64) -> Table {
    let mut table = Table::new(std::iter::once("period".to_string()).chain(series.iter().map(|s| s.0.clone())));
    let paths: Vec<Vec<f64>> = series.iter().map(|(_, p, r0)| path(*r0, p, periods)).collect();
    for t in 0..=periods as usize {
        let mut row = vec![json!(t)];
        row.extend(paths.iter().map(|x| num(x[t])));
        table.push(row);
    }
    table
}

fn max_stable(p: &SystemParams) -> f64 {
    equilibria(p).max_stable().unwrap_or(0.0)
}

fn alpha_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 20.0).collect()
}

/// Rows over the punishment grid, one column per environment.
fn alpha_profiles(label: &str, envs: &[(f64, SystemParams)]) -> Table {
    let mut table = Table::new(std::iter::once("alpha".to_string()).chain(envs.iter().map(|(v, _)| format!("{label}_{v}"))));
    for a in alpha_grid() {
        let mut row = vec![num(a)];
        row.extend(envs.iter().map(|(_, p)| num(max_stable(&p.with_alpha(a).expect("alpha in grid")))));
        table.push(row);
    }
    table
}

pub fn emit(figure: Figure) -> Artifact {
    let (name, setup, table) = match figure {
        Figure::Fig3 => {
            let mut series = Vec::new();
            for m in 0..=2 {
                for r0 in [0.1, 0.5, 0.9] {
                    series.push((format!("M{m}_rho0_{r0}"), params(10.0, 0.25, 0.9, m), r0));
                }
            }
            (
                "fig3",
                json!({"beta": 0.25, "gamma": 10.0, "alpha": 0.9, "M": [0, 1, 2], "rho0": [0.1, 0.5, 0.9], "periods": 30}),
                trajectories(&series, 30),
            )
        }
        Figure::Fig4 => {
            let p = params(8.0, 0.25, 0.9, 6);
            let series: Vec<_> = [0.1, 0.3, 0.5, 0.7, 0.9]
                .into_iter()
                .map(|r0| (format!("rho0_{r0}"), p, r0))
                .collect();
            (
                "fig4",
                json!({"beta": 0.25, "gamma": 8.0, "alpha": 0.9, "M": 6, "rho0": [0.1, 0.3, 0.5, 0.7, 0.9], "periods": 100}),
                trajectories(&series, 100),
            )
        }
        Figure::Fig5 => {
            let p = params(8.0, 0.25, 0.9, 0);
            let mut table = Table::new(["rho_0", "limit"]);
            for i in 0..=100 {
                let r0 = i as f64 / 100.0;
                table.push(vec![num(r0), num(limit_map_unlimited(r0, &p))]);
            }
            (
                "fig5",
                json!({"beta": 0.25, "gamma": 8.0, "alpha": 0.9, "M": "inf", "rho0_grid": 101}),
                table,
            )
        }
        Figure::Fig6 => {
            let alphas = [0.3, 0.5, 0.7, 0.9, 1.0];
            let mut table = Table::new(std::iter::once("M".to_string()).chain(alphas.iter().map(|a| format!("alpha_{a}"))));
            for m in 0..=8u32 {
                let mut row = vec![json!(m)];
                row.extend(alphas.iter().map(|&a| num(max_stable(&params(5.0, 0.5, a, m)))));
                table.push(row);
            }
            ("fig6", json!({"beta": 0.5, "gamma": 5.0, "alpha": alphas, "M": "0..8"}), table)
        }
        Figure::Fig7 => {
            let mut table = Table::new(["M", "optimum", "bound", "free_optimum", "free_alpha"]);
            for m in 0..=8u32 {
                let mildest = params(6.0, 0.5, 1.0, m);
                let design = optimize_alpha(0.5, 6.0, m, FIG7_ALPHA_GRID).expect("valid parameters");
                table.push(vec![
                    json!(m),
                    num(max_stable(&mildest)),
                    num(bound_cor2(&mildest)),
                    num(design.rho_star),
                    opt(design.alpha_star),
                ]);
            }
            (
                "fig7",
                json!({"beta": 0.5, "gamma": 6.0, "alpha": 1.0, "M": "0..8", "alpha_grid": FIG7_ALPHA_GRID}),
                table,
            )
        }
        Figure::Fig8 => {
            let envs: Vec<_> = [3.0, 4.0, 5.0, 6.0].into_iter().map(|g| (g, params(g, 0.5, 1.0, 1))).collect();
            (
                "fig8",
                json!({"beta": 0.5, "M": 1, "gamma": [3.0, 4.0, 5.0, 6.0], "alpha": "0.05..1 step 0.05"}),
                alpha_profiles("gamma", &envs),
            )
        }
        Figure::Fig9 => {
            let envs: Vec<_> = [0.3, 0.5, 0.7, 0.9].into_iter().map(|b| (b, params(4.0, b, 1.0, 1))).collect();
            (
                "fig9",
                json!({"gamma": 4.0, "M": 1, "beta": [0.3, 0.5, 0.7, 0.9], "alpha": "0.05..1 step 0.05"}),
                alpha_profiles("beta", &envs),
            )
        }
    };
    let mut echo: Map<String, Value> = setup.as_object().cloned().unwrap_or_default();
    echo.insert("figure".into(), json!(name));
    Artifact {
        command: "figure",
        echo,
        csv: table.to_csv(),
        json: table.to_json(),
        infeasible: false,
    }
}
