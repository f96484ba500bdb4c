//! Solving one row problem with a chosen annealing strategy.

use std::fmt;

use qnmf_core::annealer::{
    adaptive_refine, derive_seed, forward_anneal, iterated_reverse, AnnealConfig, AttemptRecord,
    ReverseConfig, Sample, ENERGY_TOLERANCE,
};
use qnmf_core::encoding::{build_d_table, decode_row, row_levels, EncodingScheme};
use qnmf_core::qubo::{
    build_row_qubo, grid_minimum, row_objective, GridOptimum, QuboProblem, RowProblem,
};
use qnmf_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Strategy {
    /// One forward call.
    Forward,
    /// Forward call, then reverse calls at a fixed holding time.
    #[value(name = "forward+reverse")]
    ForwardReverse,
    /// Forward call, then reverse calls with an escalating holding time.
    Adaptive,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Forward => "forward",
            Strategy::ForwardReverse => "forward+reverse",
            Strategy::Adaptive => "adaptive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub anneal: AnnealConfig,
    /// Holding-time settings for the adaptive loop.
    pub reverse: ReverseConfig,
    /// Holding time of the non-adaptive reverse calls, in µs.
    pub fixed_holding_time: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        let anneal = AnnealConfig::default();
        Self {
            anneal,
            reverse: ReverseConfig {
                base: anneal,
                ..ReverseConfig::default()
            },
            fixed_holding_time: 50.0,
        }
    }
}

/// A row problem with everything derived from it once.
pub struct Instance {
    pub problem: RowProblem,
    pub qubo: QuboProblem,
    pub optimum: GridOptimum,
    /// Grid levels that count as success. Without them, success means
    /// matching the grid optimum's objective.
    pub target_levels: Option<Vec<u64>>,
    /// Energy (offset included) at which refinement stops.
    pub target_energy: f64,
}

impl Instance {
    pub fn new(problem: RowProblem, target: Option<&[f64]>) -> Result<Self> {
        let qubo = build_row_qubo(&problem);
        let optimum = grid_minimum(&problem)?;
        let scheme = *problem.scheme();
        let (target_levels, target_energy) = match target {
            Some(w) => {
                if w.len() != scheme.rank() {
                    return Err(Error::Length {
                        what: "target",
                        expected: scheme.rank(),
                        found: w.len(),
                    });
                }
                let levels = w
                    .iter()
                    .map(|&x| scheme.level_of(x))
                    .collect::<Result<Vec<_>>>()?;
                let values: Vec<f64> = levels.iter().map(|&l| scheme.level_value(l)).collect();
                let energy = row_objective(&problem, &values);
                (Some(levels), energy)
            }
            None => (None, optimum.objective),
        };
        Ok(Self {
            problem,
            qubo,
            optimum,
            target_levels,
            target_energy,
        })
    }

    pub fn scheme(&self) -> &EncodingScheme {
        self.problem.scheme()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub q: Vec<bool>,
    pub levels: Vec<u64>,
    pub w: Vec<f64>,
    pub objective: f64,
    /// Energy including the offset.
    pub energy: f64,
    /// Reverse calls made; 0 for the forward strategy.
    pub attempts: Vec<AttemptRecord>,
    /// Forward reads followed by every reverse read, if recorded.
    pub samples: Vec<Sample>,
    pub modeled_qpu_us: f64,
    pub target_hit: bool,
    pub optimum_hit: bool,
}

/// One row of the trial CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub strategy: Strategy,
    pub success: bool,
    pub attempts: usize,
    pub final_objective: f64,
    /// Annealer energy, offset excluded.
    pub best_energy: f64,
}

/// Runs `strategy` on `inst`. The forward call draws from
/// `derive_seed(seed, 0)` and the reverse calls from `derive_seed(seed, 1)`.
pub fn run_trial(
    inst: &Instance,
    strategy: Strategy,
    cfg: &StrategyConfig,
    seed: u64,
    record_samples: bool,
) -> Result<TrialOutcome> {
    let forward_cfg = AnnealConfig {
        seed: derive_seed(seed, 0),
        record_samples,
        ..cfg.anneal
    };
    let forward = forward_anneal(&inst.qubo, &forward_cfg)?;
    let reverse_cfg = |holding_time: f64| ReverseConfig {
        holding_time,
        target_energy: Some(inst.target_energy),
        base: AnnealConfig {
            seed: derive_seed(seed, 1),
            record_samples,
            ..cfg.reverse.base
        },
        ..cfg.reverse
    };
    let mut samples = forward.samples;
    let (q, energy, attempts, qpu) = match strategy {
        Strategy::Forward => (forward.best_q, forward.best_energy, Vec::new(), 0.0),
        Strategy::ForwardReverse | Strategy::Adaptive => {
            let refined = if strategy == Strategy::Adaptive {
                adaptive_refine(
                    &inst.qubo,
                    &forward.best_q,
                    &reverse_cfg(cfg.reverse.holding_time),
                )?
            } else {
                iterated_reverse(
                    &inst.qubo,
                    &forward.best_q,
                    &reverse_cfg(cfg.fixed_holding_time),
                )?
            };
            samples.extend(refined.samples);
            (
                refined.best_q,
                refined.best_energy,
                refined.attempts,
                refined.modeled_qpu_us,
            )
        }
    };
    let scheme = inst.scheme();
    let levels = row_levels(&q, scheme)?;
    let w = decode_row(&q, &build_d_table(scheme))?;
    let objective = row_objective(&inst.problem, &w);
    let optimum_hit = objective <= inst.optimum.objective + ENERGY_TOLERANCE;
    Ok(TrialOutcome {
        target_hit: inst
            .target_levels
            .as_ref()
            .map_or(optimum_hit, |t| *t == levels),
        optimum_hit,
        q,
        levels,
        w,
        objective,
        energy,
        attempts,
        samples,
        modeled_qpu_us: forward.modeled_qpu_us + qpu,
    })
}

impl TrialOutcome {
    pub fn record(&self, seed: u64, strategy: Strategy, offset: f64) -> TrialRecord {
        TrialRecord {
            seed,
            strategy,
            success: self.target_hit,
            attempts: self.attempts.len(),
            final_objective: self.objective,
            best_energy: self.energy - offset,
        }
    }
}
