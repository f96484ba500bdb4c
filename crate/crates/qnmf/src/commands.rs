use std::fs;
use std::path::{Path, PathBuf};

use qnmf_core::als::{factorize as run_als, FactorizationConfig, FactorizationHistory, Mode};
use qnmf_core::qubo::{check_variable_budget, RowProblem, LOGICAL_VARIABLE_LIMIT};
use qnmf_core::timing::TimingParams;
use qnmf_core::Matrix;

use crate::artifacts;
use crate::cli::{
    BenchmarkArgs, Cli, Command, FactorizeArgs, GlobalArgs, ModeArg, SolveArgs, SystemArgs,
    TimingArgs,
};
use crate::error::{CliError, CliResult};
use crate::io::{fmt_f64, read_matrix, save_qubo_text, write_matrix};
use crate::report::RunReport;
use crate::solve::{run_trial, Instance, TrialOutcome};

pub fn run(cli: &Cli) -> CliResult<RunReport> {
    let report = match &cli.command {
        Command::SolveSystem(a) => solve_system(&cli.global, a),
        Command::Benchmark(a) => benchmark(&cli.global, a),
        Command::Factorize(a) => factorize(&cli.global, a),
        Command::Timing(a) => timing(a),
    }?;
    report.check_artifacts()?;
    Ok(report)
}

pub fn solve_system(g: &GlobalArgs, a: &SolveArgs) -> CliResult<RunReport> {
    let inst = load_instance(g, &a.system)?;
    let out = run_trial(
        &inst,
        a.system.strategy,
        &g.strategy_config(),
        g.seed,
        g.trace,
    )?;
    check_energy(&out)?;

    let mut report = RunReport::new("solve-system");
    report.seed = Some(g.seed);
    report.config = g.snapshot();
    report.config("strategy", a.system.strategy);
    report
        .outcome("w", join(out.w.iter().map(|&x| fmt_short(x))))
        .outcome("levels", join(out.levels.iter()))
        .outcome("objective", fmt_f64(out.objective));
    if a.system.target.is_some() {
        report.outcome("target_hit", out.target_hit);
    }
    report
        .outcome("grid_optimum_levels", join(inst.optimum.levels.iter()))
        .outcome("grid_optimum_objective", fmt_f64(inst.optimum.objective))
        .outcome("optimum_hit", out.optimum_hit)
        .outcome("attempts", out.attempts.len())
        .outcome("modeled_qpu_us", fmt_f64(out.modeled_qpu_us));

    let dir = out_dir(g)?;
    let rows: Vec<_> = out
        .attempts
        .iter()
        .map(|r| (0, r.holding_time, r.mean_hamming))
        .collect();
    let path = dir.join("attempts.csv");
    artifacts::write_hamming_trace(&path, &rows)?;
    report.artifacts.push(path);
    if g.trace {
        let path = dir.join("trace.csv");
        artifacts::write_trace(&path, &out.samples)?;
        report.artifacts.push(path);
    }
    if a.export_qubo {
        let path = dir.join("qubo.txt");
        save_qubo_text(&path, &inst.qubo)?;
        report.artifacts.push(path);
    }
    Ok(report)
}

pub fn benchmark(g: &GlobalArgs, a: &BenchmarkArgs) -> CliResult<RunReport> {
    if a.runs == 0 {
        return Err(CliError::Input("--runs must be at least 1".into()));
    }
    let inst = load_instance(g, &a.system)?;
    let cfg = g.strategy_config();
    let strategy = a.system.strategy;
    let dir = out_dir(g)?;
    let mut report = RunReport::new("benchmark");
    report.seed = Some(g.seed);
    report.config = g.snapshot();
    report.config("strategy", strategy).config("runs", a.runs);

    let mut trials = Vec::with_capacity(a.runs);
    let mut hamming_rows = Vec::new();
    let mut optimum_hits = 0;
    for trial in 0..a.runs {
        let seed = g.seed.wrapping_add(trial as u64);
        let out = run_trial(&inst, strategy, &cfg, seed, g.trace)?;
        check_energy(&out)?;
        optimum_hits += usize::from(out.optimum_hit);
        hamming_rows.extend(
            out.attempts
                .iter()
                .map(|r| (trial, r.holding_time, r.mean_hamming)),
        );
        if g.trace {
            let path = dir.join(format!("trace_{trial:04}.csv"));
            artifacts::write_trace(&path, &out.samples)?;
            report.artifacts.push(path);
        }
        trials.push(out.record(seed, strategy, inst.qubo.offset()));
    }

    let successes = trials.iter().filter(|t| t.success).count();
    let mean_attempts = trials.iter().map(|t| t.attempts as f64).sum::<f64>() / trials.len() as f64;
    report
        .outcome("successes", format!("{successes}/{}", a.runs))
        .outcome("success_rate", successes as f64 / a.runs as f64)
        .outcome("optimum_hits", format!("{optimum_hits}/{}", a.runs))
        .outcome("mean_attempts", mean_attempts)
        .outcome("grid_optimum_levels", join(inst.optimum.levels.iter()));

    let path = dir.join("trials.csv");
    artifacts::write_trials(&path, &trials)?;
    report.artifacts.push(path);
    let path = dir.join("hamming_trace.csv");
    artifacts::write_hamming_trace(&path, &hamming_rows)?;
    report.artifacts.push(path);
    Ok(report)
}

pub fn factorize(g: &GlobalArgs, a: &FactorizeArgs) -> CliResult<RunReport> {
    let v = read_matrix(&a.v)?;
    let scheme = g.scheme()?;
    let mixed_needed = a.compare || a.mode == ModeArg::Mixed;
    if mixed_needed && !g.allow_over_budget {
        check_variable_budget(&scheme, LOGICAL_VARIABLE_LIMIT)?;
    }
    let base = FactorizationConfig {
        max_iterations: a.iterations,
        mode: Mode::Mixed,
        lambda: g.lambda,
        scheme,
        anneal: g.anneal_config(),
        reverse: g.reverse_config(),
        seed: g.seed,
        stop_tol: a.stop_tol,
        enforce_budget: !g.allow_over_budget,
    };
    let run_mode = |mode| run_als(&v, &FactorizationConfig { mode, ..base });

    let mut report = RunReport::new("factorize");
    report.seed = Some(g.seed);
    report.config = g.snapshot();
    report
        .config("iterations", a.iterations)
        .config("stop_tol", a.stop_tol);
    let dir = out_dir(g)?;
    if a.compare {
        report.config("mode", "classical+mixed");
        let classical = run_mode(Mode::Classical)?;
        let mixed = run_mode(Mode::Mixed)?;
        summarize(&mut report, "classical_", &classical);
        summarize(&mut report, "mixed_", &mixed);
        for (name, history) in [("classical", &classical), ("mixed", &mixed)] {
            let path = dir.join(format!("history_{name}.csv"));
            artifacts::write_history(&path, history)?;
            report.artifacts.push(path);
        }
        let path = dir.join("compare.csv");
        artifacts::write_compare(&path, &classical, &mixed)?;
        report.artifacts.push(path);
    } else {
        let mode = match a.mode {
            ModeArg::Classical => Mode::Classical,
            ModeArg::Mixed => Mode::Mixed,
        };
        report.config("mode", format!("{mode:?}").to_lowercase());
        let history = run_mode(mode)?;
        summarize(&mut report, "", &history);
        let path = dir.join("history.csv");
        artifacts::write_history(&path, &history)?;
        report.artifacts.push(path);
        for (name, m) in [("w.csv", &history.w), ("h.csv", &history.h)] {
            let path = dir.join(name);
            write_matrix(&path, m)?;
            report.artifacts.push(path);
        }
    }
    Ok(report)
}

pub fn timing(a: &TimingArgs) -> CliResult<RunReport> {
    let p = TimingParams {
        n_calls: a.n_calls,
        t_h: a.t_h,
        n_cycles: a.n_cycles,
        n_iterations: a.n_iterations,
        n_rows: a.n_rows,
        cycle_us: a.cycle_us,
    };
    p.validate()?;
    let mut report = RunReport::new("timing");
    report
        .config("n_calls", a.n_calls)
        .config("t_h_us", a.t_h)
        .config("n_cycles", a.n_cycles)
        .config("n_iterations", a.n_iterations)
        .config("n_rows", a.n_rows)
        .config("cycle_us", a.cycle_us);
    let forward = a.cycle_us * a.n_cycles;
    report
        .outcome("T_forward", duration(forward))
        .outcome("T_rev", duration(p.t_rev_us()))
        .outcome("T_factorization", duration(p.t_factorization_us()));
    Ok(report)
}

fn duration(us: f64) -> String {
    format!("{us} us = {} s = {:.2} h", us / 1e6, us / 3.6e9)
}

fn summarize(report: &mut RunReport, prefix: &str, h: &FactorizationHistory) {
    report
        .outcome(&format!("{prefix}best_residual"), fmt_f64(h.best_residual))
        .outcome(&format!("{prefix}best_iteration"), h.best_iteration)
        .outcome(&format!("{prefix}iterations_run"), h.records.len())
        .outcome(
            &format!("{prefix}modeled_qpu_us"),
            fmt_f64(h.total_qpu_us()),
        );
}

fn load_instance(g: &GlobalArgs, a: &SystemArgs) -> CliResult<Instance> {
    let scheme = g.scheme()?;
    let h = read_matrix(&a.h)?;
    if h.rows() != scheme.rank() {
        return Err(CliError::Input(format!(
            "{}: H has {} rows but the rank is {}",
            a.h.display(),
            h.rows(),
            scheme.rank()
        )));
    }
    let v = read_vector(&a.v)?;
    if !g.allow_over_budget {
        check_variable_budget(&scheme, LOGICAL_VARIABLE_LIMIT)?;
    }
    let problem = RowProblem::new(h, v, g.lambda, scheme)?;
    Ok(Instance::new(problem, a.target.as_deref())?)
}

/// A single row or a single column.
fn read_vector(path: &Path) -> CliResult<Vec<f64>> {
    let m: Matrix = read_matrix(path)?;
    match m.shape() {
        (1, _) => Ok(m.row(0).to_vec()),
        (_, 1) => Ok(m.column(0)),
        (r, c) => Err(CliError::Input(format!(
            "{}: expected a single row or column, found {r}x{c}",
            path.display()
        ))),
    }
}

fn check_energy(out: &TrialOutcome) -> CliResult<()> {
    if (out.energy - out.objective).abs() > 1e-9 * (1.0 + out.objective.abs()) {
        return Err(CliError::Internal(format!(
            "annealer energy {} disagrees with the objective {} of its decoded row",
            out.energy, out.objective
        )));
    }
    Ok(())
}

fn out_dir(g: &GlobalArgs) -> CliResult<PathBuf> {
    fs::create_dir_all(&g.out_dir).map_err(|e| CliError::io(&g.out_dir, e))?;
    Ok(g.out_dir.clone())
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Twelve decimals with trailing zeros dropped, which hides the binary
/// representation error of grid values.
fn fmt_short(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_format() {
        assert_eq!(fmt_short(0.17800000000000002), "0.178");
        assert_eq!(fmt_short(1.0), "1");
        assert_eq!(fmt_short(0.0), "0");
        assert_eq!(fmt_short(2.0 / 15.0), "0.133333333333");
    }

    #[test]
    fn durations() {
        assert_eq!(duration(100_500_000.0), "100500000 us = 100.5 s = 0.03 h");
        assert_eq!(
            duration(10_050_000_000.0),
            "10050000000 us = 10050 s = 2.79 h"
        );
        assert_eq!(duration(0.0), "0 us = 0 s = 0.00 h");
    }
}
