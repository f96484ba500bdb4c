//! CSV artifacts. Column order is fixed; every file starts with a header.
//!
//! | file | columns |
//! |------|---------|
//! | trial | `seed,strategy,success,attempts,final_objective,best_energy` |
//! | hamming trace | `trial,holding_time_us,mean_hamming` |
//! | history | `iteration,residual,qpu_us_cumulative` |
//! | compare | `iteration,classical_residual,mixed_residual,mixed_qpu_us_cumulative` |
//! | per-cycle trace | `cycle,energy,hamming_to_prev` |

use std::path::Path;

use qnmf_core::als::FactorizationHistory;
use qnmf_core::annealer::{hamming, Sample};

use crate::error::CliResult;
use crate::io::{csv_write_error, fmt_f64};
use crate::solve::TrialRecord;

pub const TRIAL_HEADER: [&str; 6] = [
    "seed",
    "strategy",
    "success",
    "attempts",
    "final_objective",
    "best_energy",
];
pub const HAMMING_HEADER: [&str; 3] = ["trial", "holding_time_us", "mean_hamming"];
pub const HISTORY_HEADER: [&str; 3] = ["iteration", "residual", "qpu_us_cumulative"];
pub const COMPARE_HEADER: [&str; 4] = [
    "iteration",
    "classical_residual",
    "mixed_residual",
    "mixed_qpu_us_cumulative",
];
pub const TRACE_HEADER: [&str; 3] = ["cycle", "energy", "hamming_to_prev"];

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_error(path, e))?;
    w.write_record(header)
        .map_err(|e| csv_write_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_write_error(path, e))?;
    }
    w.flush().map_err(|e| crate::error::CliError::io(path, e))
}

pub fn write_trials(path: &Path, trials: &[TrialRecord]) -> CliResult<()> {
    write_csv(
        path,
        &TRIAL_HEADER,
        trials.iter().map(|t| {
            vec![
                t.seed.to_string(),
                t.strategy.to_string(),
                t.success.to_string(),
                t.attempts.to_string(),
                fmt_f64(t.final_objective),
                fmt_f64(t.best_energy),
            ]
        }),
    )
}

/// One row per reverse call: `(trial, holding_time_us, mean_hamming)`.
pub fn write_hamming_trace(path: &Path, rows: &[(usize, f64, f64)]) -> CliResult<()> {
    write_csv(
        path,
        &HAMMING_HEADER,
        rows.iter()
            .map(|&(trial, th, mh)| vec![trial.to_string(), fmt_f64(th), fmt_f64(mh)]),
    )
}

pub fn write_history(path: &Path, history: &FactorizationHistory) -> CliResult<()> {
    write_csv(
        path,
        &HISTORY_HEADER,
        history.records.iter().map(|r| {
            vec![
                r.iteration.to_string(),
                fmt_f64(r.residual),
                fmt_f64(r.qpu_us_cumulative),
            ]
        }),
    )
}

/// Both residual curves side by side. A run that stopped early leaves its
/// later cells empty.
pub fn write_compare(
    path: &Path,
    classical: &FactorizationHistory,
    mixed: &FactorizationHistory,
) -> CliResult<()> {
    let n = classical.records.len().max(mixed.records.len());
    write_csv(
        path,
        &COMPARE_HEADER,
        (0..n).map(|i| {
            let c = classical.records.get(i);
            let m = mixed.records.get(i);
            vec![
                (i + 1).to_string(),
                c.map_or(String::new(), |r| fmt_f64(r.residual)),
                m.map_or(String::new(), |r| fmt_f64(r.residual)),
                m.map_or(String::new(), |r| fmt_f64(r.qpu_us_cumulative)),
            ]
        }),
    )
}

/// Every read in order; the first row has no predecessor and an empty
/// Hamming cell.
pub fn write_trace(path: &Path, samples: &[Sample]) -> CliResult<()> {
    write_csv(
        path,
        &TRACE_HEADER,
        samples.iter().enumerate().map(|(i, s)| {
            let dist = match i {
                0 => String::new(),
                _ => hamming(&samples[i - 1].state, &s.state).to_string(),
            };
            vec![i.to_string(), fmt_f64(s.energy), dist]
        }),
    )
}
