//! Agent-based Monte Carlo simulation of the full model.
//!
//! A finite population replaces the continuum. Every period each agent
//! requests once and serves once under a uniformly random matching without
//! self-matches. Each provider observes `M` reputations sampled with
//! replacement from the other agents, draws a point belief from its
//! posterior and plays the threshold best response. All label updates land
//! together at the end of the period.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::sample_posterior;
use crate::dynamics::flows;
use crate::equilibrium::equilibria;
use crate::error::ParamError;
use crate::norm::{best_response_with, thresholds};
use crate::params::{check_probability, Reputation, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub agents: usize,
    pub periods: u64,
    pub rho_0: f64,
    pub params: SystemParams,
    pub seed: u64,
    /// Trailing periods averaged into the reported good fraction.
    pub window: u64,
}

impl SimConfig {
    pub fn new(params: SystemParams, agents: usize, periods: u64, rho_0: f64, seed: u64) -> Result<Self, ParamError> {
        let config = Self {
            agents,
            periods,
            rho_0,
            params,
            seed,
            window: periods.min(100),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_window(mut self, window: u64) -> Result<Self, ParamError> {
        self.window = window;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.agents < 2 {
            return Err(ParamError::Invalid(format!("population must have at least 2 agents, got {}", self.agents)));
        }
        if self.periods < 1 {
            return Err(ParamError::Invalid("simulation needs at least one period".into()));
        }
        if self.window < 1 || self.window > self.periods {
            return Err(ParamError::Invalid(format!(
                "averaging window must lie in [1, {}], got {}",
                self.periods, self.window
            )));
        }
        check_probability("initial good fraction", self.rho_0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub period: u64,
    /// Good fraction at the end of the period.
    pub good_fraction: f64,
    /// Bad agents restored to good.
    pub inflow: u64,
    /// Good agents demoted to bad.
    pub outflow: u64,
    pub services: u64,
    pub welfare: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub config: SimConfig,
    pub initial_good_fraction: f64,
    pub records: Vec<PeriodRecord>,
}

impl SimTrace {
    /// Mean good fraction over the trailing window.
    pub fn window_average(&self) -> f64 {
        let w = (self.config.window as usize).min(self.records.len()).max(1);
        let tail = &self.records[self.records.len() - w..];
        tail.iter().map(|r| r.good_fraction).sum::<f64>() / w as f64
    }

    /// Good fraction at the start of the given 1-based period.
    pub fn start_fraction(&self, period: u64) -> f64 {
        if period <= 1 {
            self.initial_good_fraction
        } else {
            self.records[period as usize - 2].good_fraction
        }
    }

    /// CSV with a leading `#` comment line holding the config as JSON.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let echo = serde_json::to_string(&self.config).map_err(io::Error::other)?;
        writeln!(out, "# {echo}")?;
        writeln!(out, "period,good_fraction,inflow,outflow,services,welfare")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.period, r.good_fraction, r.inflow, r.outflow, r.services, r.welfare
            )?;
        }
        Ok(())
    }
}

/// Uniform random matching `provider -> requester` with no self-match.
fn draw_matching<R: Rng>(rng: &mut R, perm: &mut [usize]) {
    loop {
        for (i, slot) in perm.iter_mut().enumerate() {
            *slot = i;
        }
        perm.shuffle(rng);
        if perm.iter().enumerate().all(|(i, &j)| i != j) {
            return;
        }
    }
}

fn initial_labels<R: Rng>(rng: &mut R, agents: usize, rho_0: f64) -> Vec<bool> {
    let good = ((rho_0 * agents as f64).round() as usize).min(agents);
    let mut labels: Vec<bool> = (0..agents).map(|i| i < good).collect();
    labels.shuffle(rng);
    labels
}

pub fn run(config: &SimConfig) -> SimTrace {
    config.validate().expect("simulation config must be validated");
    let params = &config.params;
    let t = thresholds(params);
    let n = config.agents;
    let m = params.granularity();
    let welfare_per_service = params.benefit() - params.cost();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut labels = initial_labels(&mut rng, n, config.rho_0);
    let initial_good_fraction = labels.iter().filter(|g| **g).count() as f64 / n as f64;
    let mut next = labels.clone();
    let mut perm = vec![0usize; n];
    let mut records = Vec::with_capacity(config.periods as usize);

    for period in 1..=config.periods {
        draw_matching(&mut rng, &mut perm);
        let (mut inflow, mut outflow, mut services) = (0u64, 0u64, 0u64);
        for provider in 0..n {
            let own = Reputation::from(labels[provider]);
            let requester = Reputation::from(labels[perm[provider]]);
            if requester == Reputation::Bad {
                next[provider] = labels[provider];
                continue;
            }
            let mut good_seen = 0u32;
            for _ in 0..m {
                let mut other = rng.gen_range(0..n - 1);
                if other >= provider {
                    other += 1;
                }
                good_seen += u32::from(labels[other]);
            }
            let belief = sample_posterior(good_seen, m, &mut rng);
            let serves = best_response_with(own, requester, belief, &t).serves();
            next[provider] = if serves {
                services += 1;
                match own {
                    Reputation::Good => true,
                    Reputation::Bad => rng.gen::<f64>() < params.alpha(),
                }
            } else {
                false
            };
            match (labels[provider], next[provider]) {
                (false, true) => inflow += 1,
                (true, false) => outflow += 1,
                _ => {}
            }
        }
        std::mem::swap(&mut labels, &mut next);
        let good = labels.iter().filter(|g| **g).count();
        records.push(PeriodRecord {
            period,
            good_fraction: good as f64 / n as f64,
            inflow,
            outflow,
            services,
            welfare: welfare_per_service * services as f64,
        });
    }
    SimTrace {
        config: *config,
        initial_good_fraction,
        records,
    }
}

/// Empirical versus mean-field flow rates in one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowCheck {
    pub period: u64,
    pub start_fraction: f64,
    pub inflow_rate: f64,
    pub predicted_inflow: f64,
    pub outflow_rate: f64,
    pub predicted_outflow: f64,
    /// Binomial standard errors of the two rates at the predicted values.
    pub inflow_se: f64,
    pub outflow_se: f64,
}

impl FlowCheck {
    pub fn inflow_z(&self) -> f64 {
        z_score(self.inflow_rate, self.predicted_inflow, self.inflow_se)
    }

    pub fn outflow_z(&self) -> f64 {
        z_score(self.outflow_rate, self.predicted_outflow, self.outflow_se)
    }
}

fn z_score(observed: f64, expected: f64, se: f64) -> f64 {
    if se > 0.0 {
        (observed - expected) / se
    } else if observed == expected {
        0.0
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldComparison {
    pub window_average: f64,
    pub nearest_stable_root: Option<f64>,
    /// `|window_average - nearest_stable_root|`.
    pub gap: Option<f64>,
    pub flows: Vec<FlowCheck>,
}

pub fn compare_to_meanfield(trace: &SimTrace, params: &SystemParams) -> MeanFieldComparison {
    let window_average = trace.window_average();
    let nearest_stable_root = equilibria(params).nearest_stable(window_average);
    let n = trace.config.agents as f64;
    let flows = trace
        .records
        .iter()
        .map(|r| {
            let start = trace.start_fraction(r.period);
            let predicted = flows(start, params);
            let se = |p: f64| (p * (1.0 - p) / n).max(0.0).sqrt();
            FlowCheck {
                period: r.period,
                start_fraction: start,
                inflow_rate: r.inflow as f64 / n,
                predicted_inflow: predicted.inflow,
                outflow_rate: r.outflow as f64 / n,
                predicted_outflow: predicted.outflow,
                inflow_se: se(predicted.inflow),
                outflow_se: se(predicted.outflow),
            }
        })
        .collect();
    MeanFieldComparison {
        window_average,
        nearest_stable_root,
        gap: nearest_stable_root.map(|r| (r - window_average).abs()),
        flows,
    }
}
