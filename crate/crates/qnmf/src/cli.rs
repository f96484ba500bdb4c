use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qnmf_core::annealer::{AnnealConfig, ReverseConfig};
use qnmf_core::encoding::EncodingScheme;

use crate::error::{CliError, CliResult};
use crate::solve::{Strategy, StrategyConfig};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "qnmf",
    version,
    about = "Annealing-based row solves, strategy benchmarks and NMF runs"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Run seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Value of the least significant bit.
    #[arg(long, global = true, default_value_t = 0.001)]
    pub scale: f64,
    /// Bits per encoded value.
    #[arg(long, global = true, default_value_t = 10)]
    pub bits: u32,
    /// Factorization rank (values per W row).
    #[arg(long, global = true, default_value_t = 3)]
    pub rank: usize,
    /// Weight of the sum-to-one penalty.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub lambda: f64,
    /// Reads per annealer call.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub cycles: usize,
    /// Metropolis sweeps per read.
    #[arg(long, global = true, default_value_t = 100)]
    pub sweeps: usize,
    /// Reverse calls allowed per refinement.
    #[arg(long, global = true, default_value_t = 50)]
    pub max_attempts: usize,
    /// Initial (and reset) holding time of the adaptive loop, µs.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub holding_time: f64,
    /// Holding-time cap, µs.
    #[arg(long, global = true, default_value_t = 200.0)]
    pub holding_max: f64,
    /// Holding time of the forward+reverse strategy, µs.
    #[arg(long, global = true, default_value_t = 50.0)]
    pub fixed_holding_time: f64,
    /// Also dump every read as cycle,energy,hamming_to_prev.
    #[arg(long, global = true)]
    pub trace: bool,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Skip the 65-variable limit check.
    #[arg(long, global = true)]
    pub allow_over_budget: bool,
}

impl GlobalArgs {
    pub fn scheme(&self) -> CliResult<EncodingScheme> {
        if self.bits == 0 {
            return Err(CliError::Input("--bits must be at least 1".into()));
        }
        Ok(EncodingScheme::new(self.scale, self.bits - 1, self.rank)?)
    }

    pub fn anneal_config(&self) -> AnnealConfig {
        AnnealConfig {
            cycles: self.cycles,
            sweeps_per_cycle: self.sweeps,
            seed: self.seed,
            record_samples: false,
            ..AnnealConfig::default()
        }
    }

    pub fn reverse_config(&self) -> ReverseConfig {
        ReverseConfig {
            holding_time: self.holding_time,
            holding_max: self.holding_max,
            max_attempts: self.max_attempts,
            target_energy: None,
            base: self.anneal_config(),
        }
    }

    pub fn strategy_config(&self) -> StrategyConfig {
        StrategyConfig {
            anneal: self.anneal_config(),
            reverse: self.reverse_config(),
            fixed_holding_time: self.fixed_holding_time,
        }
    }

    /// `(key, value)` pairs echoed in every report.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        [
            ("scale", self.scale.to_string()),
            ("bits", self.bits.to_string()),
            ("rank", self.rank.to_string()),
            ("lambda", self.lambda.to_string()),
            ("cycles", self.cycles.to_string()),
            ("sweeps", self.sweeps.to_string()),
            ("max_attempts", self.max_attempts.to_string()),
            ("holding_time", self.holding_time.to_string()),
            ("holding_max", self.holding_max.to_string()),
            ("fixed_holding_time", self.fixed_holding_time.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Solve one penalized row problem `min ‖v − Hᵀw‖² + λ(1 − Σw)²`.
    SolveSystem(SolveArgs),
    /// Repeat a row solve over consecutive seeds and count successes.
    Benchmark(BenchmarkArgs),
    /// Factorize `V ≈ W H` by alternating least squares.
    Factorize(FactorizeArgs),
    /// Modeled annealer time for a refinement and a whole factorization.
    Timing(TimingArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// CSV with one row of H per line (rank rows).
    #[arg(long)]
    pub h: PathBuf,
    /// CSV holding v as a single row or a single column.
    #[arg(long)]
    pub v: PathBuf,
    #[arg(long, value_enum, default_value_t = Strategy::Adaptive)]
    pub strategy: Strategy,
    /// Known solution, comma-separated; success then means decoding to it.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub target: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Also write the QUBO as text.
    #[arg(long)]
    pub export_qubo: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Trials; trial i runs with seed `--seed + i`.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Classical,
    Mixed,
}

#[derive(Debug, Clone, Args)]
pub struct FactorizeArgs {
    /// Non-negative matrix to factorize.
    #[arg(long)]
    pub v: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Mixed)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
    /// Stop once the residual is at or below this.
    #[arg(long, default_value_t = 0.0)]
    pub stop_tol: f64,
    /// Run both modes from the same initial H and write both curves.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TimingArgs {
    #[arg(long, default_value_t = 50.0, allow_negative_numbers = true)]
    pub n_calls: f64,
    /// Holding time, µs.
    #[arg(long, default_value_t = 200.0, allow_negative_numbers = true)]
    pub t_h: f64,
    #[arg(long, default_value_t = 10_000.0, allow_negative_numbers = true)]
    pub n_cycles: f64,
    #[arg(long, default_value_t = 50.0, allow_negative_numbers = true)]
    pub n_iterations: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub n_rows: f64,
    /// Duration of one anneal, µs.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub cycle_us: f64,
}
