use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "normlab", version, about = "Reputation-based social norm analysis and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum Command {
    /// Threshold beliefs of good and bad providers
    Thresholds,
    /// Belief density and tails for a social reputation (--rho-s, --M)
    Belief,
    /// Mean-field trajectory from --rho0
    Dynamics,
    /// Equilibria of the mean-field map with stability and bounds
    Equilibria,
    /// Punishment level maximizing the stable social reputation
    Design,
    /// Parameter sweep; --beta, --gamma, --alpha and --M take comma-separated lists
    Sweep,
    /// Agent-based simulation compared with the mean-field prediction
    Simulate,
    /// Plot-ready data for a preconfigured figure
    Figure {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Numeric flags are kept as text until the command knows which it needs.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Discount factor in (0, 1)
    #[arg(long, global = true)]
    pub beta: Option<String>,
    /// Benefit-to-cost ratio, > 1
    #[arg(long, global = true)]
    pub gamma: Option<String>,
    /// Punishment (restoration) probability in [0, 1]
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// Observation granularity
    #[arg(long = "M", global = true)]
    pub granularity: Option<String>,
    /// Service benefit; with --c replaces --gamma
    #[arg(long, global = true)]
    pub b: Option<String>,
    /// Service cost
    #[arg(long, global = true)]
    pub c: Option<String>,
    /// Initial good fraction
    #[arg(long, global = true)]
    pub rho0: Option<String>,
    /// Social reputation for the belief command
    #[arg(long = "rho-s", global = true)]
    pub rho_s: Option<String>,
    /// Belief cutoff for tail probabilities
    #[arg(long, global = true)]
    pub cutoff: Option<String>,
    #[arg(long, global = true)]
    pub periods: Option<String>,
    #[arg(long, global = true)]
    pub agents: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Trailing periods averaged by simulate
    #[arg(long, global = true)]
    pub window: Option<String>,
    /// Grid size: root scan cells, punishment grid points or belief table rows
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Root bisection tolerance
    #[arg(long, global = true)]
    pub tol: Option<String>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Exit with status 3 when the design is infeasible
    #[arg(long, global = true)]
    pub strict: bool,
    /// Flat key=value file supplying defaults for the flags above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

fn fill(slot: &mut Option<String>, value: &str) {
    if slot.is_none() {
        *slot = Some(value.to_string());
    }
}

impl Flags {
    /// Fills unset flags from the config file; flags always win.
    pub fn merge_config(&mut self) -> Result<(), CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(());
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.merge_text(&text, &path)
    }

    fn merge_text(&mut self, text: &str, path: &Path) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!("{}:{}: expected key=value", path.display(), n + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "beta" => fill(&mut self.beta, value),
                "gamma" => fill(&mut self.gamma, value),
                "alpha" => fill(&mut self.alpha, value),
                "M" => fill(&mut self.granularity, value),
                "b" => fill(&mut self.b, value),
                "c" => fill(&mut self.c, value),
                "rho0" => fill(&mut self.rho0, value),
                "rho-s" => fill(&mut self.rho_s, value),
                "cutoff" => fill(&mut self.cutoff, value),
                "periods" => fill(&mut self.periods, value),
                "agents" => fill(&mut self.agents, value),
                "seed" => fill(&mut self.seed, value),
                "window" => fill(&mut self.window, value),
                "grid" => fill(&mut self.grid, value),
                "tol" => fill(&mut self.tol, value),
                "out" => {
                    if self.out.is_none() {
                        self.out = Some(PathBuf::from(value));
                    }
                }
                "format" => {
                    if self.format.is_none() {
                        self.format = Some(
                            Format::from_str(value, true)
                                .map_err(|_| CliError::Usage(format!("unknown format {value:?}")))?,
                        );
                    }
                }
                "strict" => match value {
                    "true" => self.strict = true,
                    "false" => {}
                    _ => return Err(CliError::Usage(format!("strict must be true or false, got {value:?}"))),
                },
                _ => {
                    return Err(CliError::Usage(format!(
                        "{}:{}: unknown key {key:?}",
                        path.display(),
                        n + 1
                    )))
                }
            }
        }
        Ok(())
    }
}
