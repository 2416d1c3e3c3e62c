use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flipflop::{Experiment, FlipFlopParams, LearnerKind};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "ffcli", version, about = "Run and check Hedge-family learners on loss streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one of the synthetic two-expert loss streams as CSV.
    Gen(GenArgs),
    /// Run one learner; write its trace and a JSON summary with bound checks.
    Run(RunArgs),
    /// Regret of fixed-rate Hedge over a grid of learning rates.
    Sweep(SweepArgs),
    /// Check bounds and affine invariance, or re-verify a saved trace.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Ftl,
    Hedge,
    Safe,
    Adahedge,
    Flipflop,
}

impl Algo {
    pub const ALL: [Algo; 5] = [Algo::Ftl, Algo::Hedge, Algo::Safe, Algo::Adahedge, Algo::Flipflop];
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    let index: u8 = s.parse().map_err(|_| "experiment must be one of 1, 2, 3, 4".to_owned())?;
    Experiment::from_index(index).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_experiment)]
    pub experiment: Experiment,
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Where the loss stream comes from: a synthetic experiment or a CSV file.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    #[arg(long, value_parser = parse_experiment)]
    pub experiment: Option<Experiment>,
    /// Loss CSV: one row per round, one column per expert, no header.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 1000, requires = "experiment")]
    pub rounds: usize,
}

/// Parameters of the individual learners; each applies to one algorithm.
#[derive(Debug, Args)]
pub struct LearnerOpts {
    /// Learning rate of fixed-rate Hedge.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Horizon of safe Hedge; defaults to the stream length.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, default_value_t = FlipFlopParams::DEFAULT.phi)]
    pub phi: f64,
    #[arg(long, default_value_t = FlipFlopParams::DEFAULT.alpha)]
    pub alpha: f64,
}

impl LearnerOpts {
    /// The learner for `algo`; options meant for another algorithm are an error.
    pub fn kind(&self, algo: Algo, rounds: usize) -> Result<LearnerKind, CliError> {
        if self.eta.is_some() && algo != Algo::Hedge {
            return Err(CliError::Usage("--eta only applies to --algo hedge".into()));
        }
        if self.horizon.is_some() && algo != Algo::Safe {
            return Err(CliError::Usage("--horizon only applies to --algo safe".into()));
        }
        let eta = self
            .eta
            .ok_or_else(|| CliError::Usage("--algo hedge requires --eta".into()));
        self.build(algo, rounds, eta)
    }

    /// The learner for `algo` within a set of learners: options meant for
    /// other algorithms are ignored and Hedge falls back to `eta = 1`.
    pub fn kind_in_set(&self, algo: Algo, rounds: usize) -> Result<LearnerKind, CliError> {
        self.build(algo, rounds, Ok(self.eta.unwrap_or(1.0)))
    }

    fn build(&self, algo: Algo, rounds: usize, eta: Result<f64, CliError>) -> Result<LearnerKind, CliError> {
        let kind = match algo {
            Algo::Ftl => LearnerKind::Ftl,
            Algo::Hedge => LearnerKind::FixedHedge { eta: eta? },
            Algo::Safe => LearnerKind::SafeHedge {
                horizon: self.horizon.unwrap_or(rounds),
            },
            Algo::Adahedge => LearnerKind::AdaHedge,
            Algo::Flipflop => LearnerKind::FlipFlop(FlipFlopParams {
                phi: self.phi,
                alpha: self.alpha,
            }),
        };
        kind.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(kind)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[command(flatten)]
    pub learner: LearnerOpts,
    #[command(flatten)]
    pub input: InputArgs,
    /// Per-round trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// JSON summary; stdout when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated rates; `inf` means Follow-the-Leader. Defaults to 100
    /// log-spaced rates in [1e-3, 1e2] plus `inf`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Output CSV with columns `eta,regret`; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_parser = parse_experiment, conflicts_with_all = ["input", "verify_trace"])]
    pub experiment: Option<Experiment>,
    #[arg(long, default_value_t = 1000, requires = "experiment")]
    pub rounds: usize,
    #[arg(long, conflicts_with = "verify_trace")]
    pub input: Option<PathBuf>,
    /// Seed of the random affine transform used for the invariance check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Re-read a trace CSV written by `run` and verify its per-round
    /// inequalities for `--algo`.
    #[arg(long, requires = "algo")]
    pub verify_trace: Option<PathBuf>,
    /// Restrict the check to one learner; all five by default.
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    #[command(flatten)]
    pub learner: LearnerOpts,
}
