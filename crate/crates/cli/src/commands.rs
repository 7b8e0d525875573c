use serde_json::{json, Map, Value};

use normlab::abm::{compare_to_meanfield, run, SimConfig};
use normlab::belief::{belief_tail, BeliefDistribution, TailQuery};
use normlab::design::{optimize_alpha, sweep, AlphaAxis, SweepAxes, DEFAULT_ALPHA_GRID};
use normlab::dynamics::trajectory;
use normlab::equilibrium::{find_equilibria, DEFAULT_GRID_N, DEFAULT_TOL};
use normlab::norm::{cooperation_feasible, thresholds};
use normlab::SystemParams;

use crate::args::{Command, Flags};
use crate::error::CliError;
use crate::figures;
use crate::output::{num, opt, Artifact, Table};

const DEFAULT_DYNAMICS_PERIODS: u64 = 1000;
const DEFAULT_BELIEF_ROWS: usize = 101;
const DEFAULT_AGENTS: usize = 10_000;
const DEFAULT_SIM_PERIODS: u64 = 500;

/// Parses flags on demand and records every resolved value for the echo.
struct Inputs<'a> {
    flags: &'a Flags,
    echo: Map<String, Value>,
}

fn parse_f64(key: &str, raw: &str) -> Result<f64, CliError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--{key} expects a number, got {raw:?}")))?;
    if !v.is_finite() {
        return Err(CliError::Validation(format!("--{key} must be finite, got {raw}")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--{key} expects a nonnegative integer, got {raw:?}")))
}

fn missing(key: &str) -> CliError {
    CliError::Usage(format!("missing required flag --{key}"))
}

impl<'a> Inputs<'a> {
    fn new(flags: &'a Flags) -> Self {
        Self { flags, echo: Map::new() }
    }

    fn f64_opt(&mut self, key: &'static str, raw: &Option<String>) -> Result<Option<f64>, CliError> {
        let Some(raw) = raw else { return Ok(None) };
        let v = parse_f64(key, raw)?;
        self.echo.insert(key.into(), json!(v));
        Ok(Some(v))
    }

    fn f64(&mut self, key: &'static str, raw: &Option<String>, default: Option<f64>) -> Result<f64, CliError> {
        match (self.f64_opt(key, raw)?, default) {
            (Some(v), _) => Ok(v),
            (None, Some(d)) => {
                self.echo.insert(key.into(), json!(d));
                Ok(d)
            }
            (None, None) => Err(missing(key)),
        }
    }

    fn int<T>(&mut self, key: &'static str, raw: &Option<String>, default: T) -> Result<T, CliError>
    where
        T: std::str::FromStr + Into<Value> + Copy,
    {
        let v = match raw {
            Some(raw) => parse_int(key, raw)?,
            None => default,
        };
        self.echo.insert(key.into(), v.into());
        Ok(v)
    }

    fn usize(&mut self, key: &'static str, raw: &Option<String>, default: usize) -> Result<usize, CliError> {
        let v = self.int::<u64>(key, raw, default as u64)?;
        usize::try_from(v).map_err(|_| CliError::Validation(format!("--{key} is too large")))
    }

    fn list_f64(&mut self, key: &'static str, raw: &Option<String>) -> Result<Vec<f64>, CliError> {
        let raw = raw.as_ref().ok_or_else(|| missing(key))?;
        let values = raw.split(',').map(|s| parse_f64(key, s)).collect::<Result<Vec<_>, _>>()?;
        self.echo.insert(key.into(), json!(values));
        Ok(values)
    }

    /// Environment and mechanism. `alpha` may be absent for commands that
    /// choose it themselves.
    fn params(&mut self, alpha_required: bool) -> Result<SystemParams, CliError> {
        let flags = self.flags;
        let beta = self.f64("beta", &flags.beta, None)?;
        let alpha = if alpha_required {
            self.f64("alpha", &flags.alpha, None)?
        } else {
            1.0
        };
        let m = self.int::<u32>("M", &flags.granularity, 0)?;
        let params = match (&flags.b, &flags.c) {
            (None, None) => {
                let gamma = self.f64("gamma", &flags.gamma, None)?;
                SystemParams::new(gamma, beta, alpha, m)?
            }
            (Some(_), Some(_)) => {
                if flags.gamma.is_some() {
                    return Err(CliError::Usage("give either --gamma or --b with --c, not both".into()));
                }
                let b = self.f64("b", &flags.b, None)?;
                let c = self.f64("c", &flags.c, None)?;
                let p = SystemParams::from_benefit_cost(b, c, beta, alpha, m)?;
                self.echo.insert("gamma".into(), json!(p.gamma()));
                p
            }
            _ => return Err(CliError::Usage("--b and --c must be given together".into())),
        };
        Ok(params)
    }

    fn finish(self, command: &'static str, table: Table, json: Value) -> Artifact {
        Artifact {
            command,
            echo: self.echo,
            csv: table.to_csv(),
            json,
            infeasible: false,
        }
    }
}

pub fn dispatch(command: Command, flags: &Flags) -> Result<Artifact, CliError> {
    match command {
        Command::Thresholds => cmd_thresholds(flags),
        Command::Belief => cmd_belief(flags),
        Command::Dynamics => cmd_dynamics(flags),
        Command::Equilibria => cmd_equilibria(flags),
        Command::Design => cmd_design(flags),
        Command::Sweep => cmd_sweep(flags),
        Command::Simulate => cmd_simulate(flags),
        Command::Figure { figure } => Ok(figures::emit(figure)),
    }
}

fn cmd_thresholds(flags: &Flags) -> Result<Artifact, CliError> {
    let mut inputs = Inputs::new(flags);
    let p = inputs.params(true)?;
    let t = thresholds(&p);
    let feasible = cooperation_feasible(&p);
    let mut table = Table::new(["rho_g", "rho_b", "restorable", "cooperation_feasible"]);
    table.push(vec![num(t.rho_g), num(t.rho_b), json!(t.restorable()), json!(feasible)]);
    let body = json!({
        "rho_g": num(t.rho_g),
        "rho_b": num(t.rho_b),
        "restorable": t.restorable(),
        "cooperation_feasible": feasible,
    });
    Ok(inputs.finish("thresholds", table, body))
}

fn cmd_belief(flags: &Flags) -> Result<Artifact, CliError> {
    let mut inputs = Inputs::new(flags);
    let rho_s = inputs.f64("rho-s", &flags.rho_s, None)?;
    let m = inputs.int::<u32>("M", &flags.granularity, 0)?;
    let rows = inputs.usize("grid", &flags.grid, DEFAULT_BELIEF_ROWS)?;
    if rows < 2 {
        return Err(CliError::Validation("--grid must be at least 2".into()));
    }
    let cutoff = inputs.f64_opt("cutoff", &flags.cutoff)?;
    let dist = BeliefDistribution::new(rho_s, m)?;

    let mut table = Table::new(["rho", "pdf", "at_least", "at_most"]);
    for i in 0..rows {
        let rho = i as f64 / (rows - 1) as f64;
        table.push(vec![
            num(rho),
            num(dist.pdf(rho)),
            num(belief_tail(TailQuery::at_least(rho)?, &dist)),
            num(belief_tail(TailQuery::at_most(rho)?, &dist)),
        ]);
    }
    let mut body = json!({ "density": table.to_json() });
    if let Some(x) = cutoff {
        body["cutoff"] = json!({
            "x": x,
            "at_least": num(belief_tail(TailQuery::at_least(x)?, &dist)),
            "at_most": num(belief_tail(TailQuery::at_most(x)?, &dist)),
        });
    }
    Ok(inputs.finish("belief", table, body))
}

fn cmd_dynamics(flags: &Flags) -> Result<Artifact, CliError> {
    let mut inputs = Inputs::new(flags);
    let p = inputs.params(true)?;
    let rho_0 = inputs.f64("rho0", &flags.rho0, None)?;
    if !(0.0..=1.0).contains(&rho_0) {
        return Err(CliError::Validation(format!("--rho0 must lie in [0, 1], got {rho_0}")));
    }
    let periods = inputs.int::<u64>("periods", &flags.periods, DEFAULT_DYNAMICS_PERIODS)?;
    let traj = trajectory(rho_0, &p, periods);
    let mut table = Table::new(["period", "rho_s", "inflow", "outflow"]);
    for r in &traj.records {
        table.push(vec![json!(r.period), num(r.rho_s), num(r.inflow), num(r.outflow)]);
    }
    let body = json!({
        "termination": traj.termination,
        "final_state": num(traj.final_state()),
        "trajectory": table.to_json(),
    });
    Ok(inputs.finish("dynamics", table, body))
}

fn cmd_equilibria(flags: &Flags) -> Result<Artifact, CliError> {
    let mut inputs = Inputs::new(flags);
    let p = inputs.params(true)?;
    let grid = inputs.usize("grid", &flags.grid, DEFAULT_GRID_N)?;
    let tol = inputs.f64("tol", &flags.tol, Some(DEFAULT_TOL))?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Validation(format!("--tol must be positive, got {tol}")));
    }
    let report = find_equilibria(&p, grid, tol)?;
    let mut table = Table::new(["rho_s", "stable", "stability", "derivative"]);
    for r in &report.roots {
        table.push(vec![num(r.rho_s), json!(r.stable), json!(r.stability), num(r.derivative)]);
    }
    let body = json!({
        "thresholds": report.thresholds,
        "roots": report.roots,
        "stable_roots": report.stable_roots().map(|r| r.rho_s).collect::<Vec<_>>(),
        "max_stable": opt(report.max_stable()),
        "bounds": report.bounds,
        "closed_form": opt(report.closed_form),
    });
    Ok(inputs.finish("equilibria", table, body))
}

fn cmd_design(flags: &Flags) -> Result<Artifact, CliError> {
    let mut inputs = Inputs::new(flags);
    let p = inputs.params(false)?;
    let grid = inputs.usize("grid", &flags.grid, DEFAULT_ALPHA_GRID)?;
    let result = optimize_alpha(p.beta(), p.gamma(), p.granularity(), grid)?;
    let mut table = Table::new([
        "alpha_star",
        "rho_star",
        "method",
        "infeasible",
        "alpha_min",
        "exact",
        "grid_rho_star",
        "cross_check_gap",
    ]);
    table.push(vec![
        opt(result.alpha_star),
        num(result.rho_star),
        json!(result.method),
        json!(result.infeasible),
        opt(result.feasible_alpha_range.map(|r| r.0)),
        json!(result.exact),
        opt(result.grid_rho_star),
        opt(result.cross_check_gap),
    ]);
    let infeasible = result.infeasible;
    let body = serde_json::to_value(&result).expect("serializable");
    let mut artifact = inputs.finish("design", table, body);
    artifact.infeasible = infeasible;
    Ok(artifact)
}

fn cmd_sweep(flags: &Flags) -> Result<Artifact, CliError> {
    let mut inputs = Inputs::new(flags);
    let beta = inputs.list_f64("beta", &flags.beta)?;
    let gamma = inputs.list_f64("gamma", &flags.gamma)?;
    let granularity: Vec<u32> = match &flags.granularity {
        Some(raw) => raw.split(',').map(|s| parse_int("M", s)).collect::<Result<_, _>>()?,
        None => vec![0],
    };
    inputs.echo.insert("M".into(), json!(granularity));
    let alpha = match flags.alpha.as_deref() {
        None | Some("opt") => {
            let grid = inputs.usize("grid", &flags.grid, DEFAULT_ALPHA_GRID)?;
            inputs.echo.insert("alpha".into(), json!("opt"));
            AlphaAxis::Optimize(grid)
        }
        Some(_) => AlphaAxis::Values(inputs.list_f64("alpha", &flags.alpha)?),
    };
    let table = sweep(&SweepAxes {
        beta,
        gamma,
        alpha,
        granularity,
    })?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    let body = serde_json::to_value(&table.cells).expect("serializable");
    Ok(Artifact {
        command: "sweep",
        echo: inputs.echo,
        csv: String::from_utf8(csv).expect("utf-8"),
        json: body,
        infeasible: false,
    })
}

fn cmd_simulate(flags: &Flags) -> Result<Artifact, CliError> {
    let mut inputs = Inputs::new(flags);
    let p = inputs.params(true)?;
    let agents = inputs.usize("agents", &flags.agents, DEFAULT_AGENTS)?;
    let periods = inputs.int::<u64>("periods", &flags.periods, DEFAULT_SIM_PERIODS)?;
    let rho_0 = inputs.f64("rho0", &flags.rho0, Some(0.5))?;
    let seed = inputs.int::<u64>("seed", &flags.seed, 0)?;
    let window = inputs.int::<u64>("window", &flags.window, periods.clamp(1, 100))?;
    let config = SimConfig::new(p, agents, periods, rho_0, seed)?.with_window(window)?;
    let trace = run(&config);
    let cmp = compare_to_meanfield(&trace, &p);

    let mut table = Table::new(["period", "good_fraction", "inflow", "outflow", "services", "welfare"]);
    for r in &trace.records {
        table.push(vec![
            json!(r.period),
            num(r.good_fraction),
            json!(r.inflow),
            json!(r.outflow),
            json!(r.services),
            num(r.welfare),
        ]);
    }
    let max_z = |f: fn(&normlab::abm::FlowCheck) -> f64| cmp.flows.iter().map(|c| f(c).abs()).fold(0.0, f64::max);
    let body = json!({
        "initial_good_fraction": trace.initial_good_fraction,
        "window_average": cmp.window_average,
        "nearest_stable_root": opt(cmp.nearest_stable_root),
        "gap": opt(cmp.gap),
        "max_abs_inflow_z": num(max_z(|c| c.inflow_z())),
        "max_abs_outflow_z": num(max_z(|c| c.outflow_z())),
        "trace": table.to_json(),
    });
    Ok(inputs.finish("simulate", table, body))
}
