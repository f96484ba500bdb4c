//! Alternating least squares for `V ≈ W H` with `W ≥ 0`, rows of `W` summing
//! to one (by penalty) and `H ≥ 0`.
//!
//! Every iteration solves all rows of `W` for the current `H`, then all
//! columns of `H` for the new `W`, and records `‖V − W H‖_F`. In mixed mode the
//! `W` rows go through the annealer on the binary encoding; `H` is always
//! solved by NNLS and never quantized.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::annealer::{adaptive_refine, derive_seed, forward_anneal, AnnealConfig, ReverseConfig};
use crate::encoding::{build_d_table, decode_row, EncodingScheme};
use crate::linalg::{residual_norm, Matrix};
use crate::nnls::{solve_h_column, solve_penalized_row};
use crate::qubo::{build_row_qubo, check_variable_budget, RowProblem, LOGICAL_VARIABLE_LIMIT};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `W` rows by penalized NNLS.
    Classical,
    /// `W` rows by forward annealing plus adaptive reverse refinement.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationConfig {
    pub max_iterations: usize,
    pub mode: Mode,
    /// Weight of the sum-to-one penalty on each `W` row.
    pub lambda: f64,
    /// Value encoding; its rank is the factorization rank `k`.
    pub scheme: EncodingScheme,
    pub anneal: AnnealConfig,
    pub reverse: ReverseConfig,
    pub seed: u64,
    /// Stop early once the residual is at or below this.
    pub stop_tol: f64,
    /// Refuse encodings wider than the annealer's logical variable limit.
    pub enforce_budget: bool,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            mode: Mode::Mixed,
            lambda: 1.0,
            scheme: EncodingScheme::default(),
            anneal: AnnealConfig::default(),
            reverse: ReverseConfig::default(),
            seed: 0,
            stop_tol: 0.0,
            enforce_budget: true,
        }
    }
}

impl FactorizationConfig {
    pub fn rank(&self) -> usize {
        self.scheme.rank()
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max iterations must be at least 1"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidConfig(
                "penalty weight must be finite and >= 0",
            ));
        }
        if self.stop_tol.is_nan() || self.stop_tol < 0.0 {
            return Err(Error::InvalidConfig("stop tolerance must be >= 0"));
        }
        if self.mode == Mode::Mixed {
            self.anneal.validate()?;
            self.reverse.validate()?;
        }
        Ok(())
    }
}

/// Per-row solver report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowDiagnostics {
    /// Reverse calls used (0 in classical mode).
    pub attempts_used: usize,
    /// Modeled annealer time of the forward call plus all reverse calls.
    pub modeled_qpu_us: f64,
    /// Row objective at the returned `w`.
    pub objective: f64,
    /// The refinement loop ran out of attempts before reaching a target.
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub residual: f64,
    pub row_attempts: Vec<usize>,
    pub qpu_us: f64,
    pub qpu_us_cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationHistory {
    pub records: Vec<IterationRecord>,
    /// Factors with the lowest residual seen.
    pub w: Matrix,
    pub h: Matrix,
    pub best_residual: f64,
    /// 1-based iteration of `best_residual`.
    pub best_iteration: usize,
    /// Factors after the last iteration.
    pub last_w: Matrix,
    pub last_h: Matrix,
}

impl FactorizationHistory {
    /// Lowest residual seen up to and including each iteration.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.records
            .iter()
            .scan(f64::INFINITY, |best, r| {
                *best = best.min(r.residual);
                Some(*best)
            })
            .collect()
    }

    pub fn total_qpu_us(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.qpu_us_cumulative)
    }
}

/// Initial `H`: `k × m`, entries uniform in `[0, 1)`.
pub fn init_h(k: usize, m: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..k * m).map(|_| rng.random::<f64>()).collect();
    Matrix::new(k, m, data).expect("finite entries")
}

/// Solves one row of `W` for fixed `H`. Annealer randomness comes from
/// `cfg.seed`.
pub fn solve_w_row(
    h: &Matrix,
    v_row: &[f64],
    cfg: &FactorizationConfig,
) -> Result<(Vec<f64>, RowDiagnostics)> {
    let problem = RowProblem::new(h.clone(), v_row.to_vec(), cfg.lambda, cfg.scheme)?;
    match cfg.mode {
        Mode::Classical => {
            let max = cfg.scheme.max_value();
            let solved = solve_penalized_row(h, v_row, cfg.lambda)?;
            let w: Vec<f64> = solved.x.iter().map(|x| x.min(max)).collect();
            let objective = crate::qubo::row_objective(&problem, &w);
            Ok((
                w,
                RowDiagnostics {
                    attempts_used: 0,
                    modeled_qpu_us: 0.0,
                    objective,
                    exhausted: false,
                },
            ))
        }
        Mode::Mixed => {
            if cfg.enforce_budget {
                check_variable_budget(&cfg.scheme, LOGICAL_VARIABLE_LIMIT)?;
            }
            let qubo = build_row_qubo(&problem);
            let forward = AnnealConfig {
                seed: derive_seed(cfg.seed, 0),
                record_samples: false,
                ..cfg.anneal
            };
            let start = forward_anneal(&qubo, &forward)?;
            let reverse = ReverseConfig {
                base: AnnealConfig {
                    seed: derive_seed(cfg.seed, 1),
                    record_samples: false,
                    ..cfg.reverse.base
                },
                ..cfg.reverse
            };
            let refined = adaptive_refine(&qubo, &start.best_q, &reverse)?;
            let w = decode_row(&refined.best_q, &build_d_table(&cfg.scheme))?;
            Ok((
                w,
                RowDiagnostics {
                    attempts_used: refined.attempts_used,
                    modeled_qpu_us: start.modeled_qpu_us + refined.modeled_qpu_us,
                    objective: refined.best_energy,
                    exhausted: !refined.reached_target,
                },
            ))
        }
    }
}

/// Runs the alternating scheme from a random `H` and returns the full
/// history together with the best factor pair seen.
pub fn factorize(v: &Matrix, cfg: &FactorizationConfig) -> Result<FactorizationHistory> {
    cfg.validate()?;
    for i in 0..v.rows() {
        for (j, &x) in v.row(i).iter().enumerate() {
            if x < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: x,
                });
            }
        }
    }
    let (n, m) = v.shape();
    let k = cfg.rank();
    let mut h = init_h(k, m, cfg.seed);
    let mut w = Matrix::zeros(n, k);
    let columns: Vec<Vec<f64>> = (0..m).map(|j| v.column(j)).collect();

    let mut records: Vec<IterationRecord> = Vec::with_capacity(cfg.max_iterations);
    let mut best: Option<(f64, usize, Matrix, Matrix)> = None;
    let mut cumulative = 0.0;
    for it in 0..cfg.max_iterations {
        let mut row_attempts = Vec::with_capacity(n);
        let mut qpu = 0.0;
        for i in 0..n {
            let row_cfg = FactorizationConfig {
                seed: derive_seed(cfg.seed, (it * n + i) as u64),
                ..*cfg
            };
            let (row, diag) = solve_w_row(&h, v.row(i), &row_cfg)?;
            w.set_row(i, &row)?;
            row_attempts.push(diag.attempts_used);
            qpu += diag.modeled_qpu_us;
        }
        for (j, col) in columns.iter().enumerate() {
            h.set_column(j, &solve_h_column(&w, col)?)?;
        }
        let residual = residual_norm(v, &w, &h)?;
        cumulative += qpu;
        records.push(IterationRecord {
            iteration: it + 1,
            residual,
            row_attempts,
            qpu_us: qpu,
            qpu_us_cumulative: cumulative,
        });
        if best.as_ref().is_none_or(|(r, ..)| residual < *r) {
            best = Some((residual, it + 1, w.clone(), h.clone()));
        }
        if residual <= cfg.stop_tol {
            break;
        }
    }

    let (best_residual, best_iteration, best_w, best_h) = best.expect("at least one iteration");
    Ok(FactorizationHistory {
        records,
        w: best_w,
        h: best_h,
        best_residual,
        best_iteration,
        last_w: w,
        last_h: h,
    })
}
