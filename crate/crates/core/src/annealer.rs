//! Classical stand-ins for quantum annealer calls.
//!
//! A *cycle* is one independent read: a Metropolis single-bit-flip run of
//! `sweeps_per_cycle` sweeps that returns its final state. A *call* runs
//! `cycles` reads and keeps the best.
//!
//! * [`forward_anneal`] starts every read from a uniformly random state and
//!   cools geometrically from `t_initial` to `t_final`.
//! * [`reverse_anneal`] starts every read from a given state, heats to a peak
//!   temperature set by the holding time, holds there, then cools back. A
//!   longer holding time means a hotter peak and a wider search around the
//!   start state.
//! * [`adaptive_refine`] chains reverse calls: on success it moves to the new
//!   state and resets the holding time, on failure it doubles the holding
//!   time up to the cap.
//!
//! Every read owns a ChaCha stream derived from `(seed, read index)`, so an
//! outcome depends only on the problem and the configuration.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoding::{bits_level, level_bits};
use crate::qubo::QuboProblem;
use crate::timing::TimingModel;
use crate::{Error, Result};

/// Energies closer than this are treated as equal.
pub const ENERGY_TOLERANCE: f64 = 1e-12;

/// Largest problem [`brute_force_minimum`] accepts.
pub const BRUTE_FORCE_CAP: usize = 24;

/// Default final temperature as a fraction of the smallest nonzero
/// coefficient magnitude.
const FINAL_TEMPERATURE_FRACTION: f64 = 0.01;

/// Parameters shared by every annealing call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealConfig {
    /// Independent reads per call.
    pub cycles: usize,
    pub sweeps_per_cycle: usize,
    /// Starting temperature; defaults to the largest single-flip energy
    /// change so that almost every move is accepted at first.
    pub t_initial: Option<f64>,
    /// Final temperature; defaults to 1% of the smallest nonzero coefficient.
    pub t_final: Option<f64>,
    pub seed: u64,
    /// Keep every read's final state in [`AnnealOutcome::samples`].
    pub record_samples: bool,
    /// Modeled duration of one hardware anneal, in µs.
    pub cycle_us: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            cycles: 10_000,
            sweeps_per_cycle: 100,
            t_initial: None,
            t_final: None,
            seed: 0,
            record_samples: true,
            cycle_us: 1.0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cycles == 0 {
            return Err(Error::InvalidConfig("cycles must be at least 1"));
        }
        if self.sweeps_per_cycle == 0 {
            return Err(Error::InvalidConfig("sweeps per cycle must be at least 1"));
        }
        let positive = |t: Option<f64>| t.is_none_or(|t| t.is_finite() && t > 0.0);
        if !positive(self.t_initial) || !positive(self.t_final) {
            return Err(Error::InvalidConfig("temperatures must be positive"));
        }
        if let (Some(hi), Some(lo)) = (self.t_initial, self.t_final) {
            if hi <= lo {
                return Err(Error::InvalidConfig("t_initial must exceed t_final"));
            }
        }
        if !(self.cycle_us.is_finite() && self.cycle_us >= 0.0) {
            return Err(Error::InvalidConfig("cycle duration must be non-negative"));
        }
        Ok(())
    }

    fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Reverse-annealing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReverseConfig {
    /// Holding time in µs. For [`adaptive_refine`] this is the start (and
    /// reset) value.
    pub holding_time: f64,
    /// Holding-time cap in µs; a call at the cap searches at `t_initial`.
    pub holding_max: f64,
    pub max_attempts: usize,
    /// Stop refining once the best energy (offset included) reaches this.
    pub target_energy: Option<f64>,
    pub base: AnnealConfig,
}

impl Default for ReverseConfig {
    fn default() -> Self {
        Self {
            holding_time: 1.0,
            holding_max: 200.0,
            max_attempts: 50,
            target_energy: None,
            base: AnnealConfig::default(),
        }
    }
}

impl ReverseConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.holding_max.is_finite() && self.holding_max > 0.0) {
            return Err(Error::InvalidConfig("holding-time cap must be positive"));
        }
        if !(self.holding_time > 0.0 && self.holding_time <= self.holding_max) {
            return Err(Error::InvalidConfig("holding time must lie in (0, cap]"));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig("max attempts must be at least 1"));
        }
        Ok(())
    }
}

/// Final state of one read and its energy, offset included.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: Vec<bool>,
    pub energy: f64,
}

/// What happened during one reverse call of a refinement loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttemptRecord {
    pub holding_time: f64,
    /// Best energy before the call.
    pub start_energy: f64,
    /// Best energy returned by the call.
    pub call_energy: f64,
    pub improved: bool,
    /// Reversal distance of the call.
    pub mean_hamming: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub best_q: Vec<bool>,
    /// Objective value of `best_q`: QUBO energy plus offset.
    pub best_energy: f64,
    /// One entry per read, in read order (empty unless recording).
    pub samples: Vec<Sample>,
    /// Mean Hamming distance between consecutive read results; 0 for a
    /// single read.
    pub mean_hamming: f64,
    /// Annealer calls issued (reverse calls for refinement loops).
    pub attempts_used: usize,
    pub modeled_qpu_us: f64,
    /// Per-call trace of refinement loops; empty for single calls.
    pub attempts: Vec<AttemptRecord>,
    /// A target energy was given and reached.
    pub reached_target: bool,
}

/// Exact minimum by exhaustive enumeration. Ties go to the state with the
/// smallest value read as a least-significant-first integer.
pub fn brute_force_minimum(qubo: &QuboProblem) -> Result<(Vec<bool>, f64)> {
    let n = qubo.n_vars();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            n_vars: n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    if n == 0 {
        return Ok((Vec::new(), qubo.offset()));
    }
    let dense = Dense::new(qubo);
    // Depth-first over bits from most to least significant visits states in
    // increasing integer order, so a strict `<` keeps the lowest tie.
    let mut search = Exhaustive {
        dense: &dense,
        field: dense.linear.clone(),
        state: 0,
        best: (f64::INFINITY, 0),
    };
    search.descend(n, 0.0);
    let (_, level) = search.best;
    let q = level_bits(level, n);
    let energy = qubo.energy(&q)? + qubo.offset();
    Ok((q, energy))
}

struct Exhaustive<'a> {
    dense: &'a Dense,
    /// `a(e) + Σ_{f decided, q_f = 1} b(e, f)` for undecided `e`.
    field: Vec<f64>,
    state: u64,
    best: (f64, u64),
}

impl Exhaustive<'_> {
    fn descend(&mut self, remaining: usize, energy: f64) {
        if remaining == 0 {
            if energy < self.best.0 {
                self.best = (energy, self.state);
            }
            return;
        }
        let e = remaining - 1;
        self.descend(e, energy);

        let n = self.dense.n;
        let gain = self.field[e];
        self.state |= 1 << e;
        for f in 0..e {
            self.field[f] += self.dense.coupling[e * n + f];
        }
        self.descend(e, energy + gain);
        for f in 0..e {
            self.field[f] -= self.dense.coupling[e * n + f];
        }
        self.state &= !(1 << e);
    }
}

/// Mean Hamming distance between consecutive solutions.
pub fn mean_hamming<S: AsRef<[bool]>>(solutions: &[S]) -> Result<f64> {
    if solutions.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: solutions.len(),
        });
    }
    let len = solutions[0].as_ref().len();
    let mut total = 0usize;
    for pair in solutions.windows(2) {
        let (a, b) = (pair[0].as_ref(), pair[1].as_ref());
        if b.len() != len {
            return Err(Error::Length {
                what: "solution",
                expected: len,
                found: b.len(),
            });
        }
        total += hamming(a, b);
    }
    Ok(total as f64 / (solutions.len() - 1) as f64)
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Forward annealing from independent random states.
pub fn forward_anneal(qubo: &QuboProblem, cfg: &AnnealConfig) -> Result<AnnealOutcome> {
    cfg.validate()?;
    let dense = Dense::new(qubo);
    let temps = Temperatures::resolve(qubo, cfg);
    let sweeps = cfg.sweeps_per_cycle;
    let mut acc = Accumulator::new(cfg.record_samples, None);
    for cycle in 0..cfg.cycles {
        let mut rng = cycle_rng(cfg.seed, cycle as u64);
        let start: Vec<bool> = (0..dense.n).map(|_| rng.random()).collect();
        let mut walker = Walker::new(&dense, start);
        for s in 0..sweeps {
            walker.sweep(temps.cooling(s, sweeps), &mut rng);
        }
        let energy = dense.energy(&walker.state) + qubo.offset();
        acc.push(walker.state, energy);
    }
    let qpu = TimingModel {
        cycle_us: cfg.cycle_us,
    }
    .t_forward(cfg.cycles as f64);
    Ok(acc.finish(qpu))
}

/// Reverse annealing: every read starts at `q0`. If no read beats `q0`,
/// `best_q == q0`.
pub fn reverse_anneal(
    qubo: &QuboProblem,
    q0: &[bool],
    cfg: &ReverseConfig,
) -> Result<AnnealOutcome> {
    cfg.validate()?;
    if q0.len() != qubo.n_vars() {
        return Err(Error::Length {
            what: "reverse anneal start state",
            expected: qubo.n_vars(),
            found: q0.len(),
        });
    }
    let base = &cfg.base;
    let dense = Dense::new(qubo);
    let temps = Temperatures::resolve(qubo, base);
    let peak = temps.peak(cfg.holding_time, cfg.holding_max);
    let start_energy = dense.energy(q0) + qubo.offset();
    let mut acc = Accumulator::new(base.record_samples, Some((q0.to_vec(), start_energy)));

    let sweeps = base.sweeps_per_cycle;
    let heat = sweeps / 4;
    let hold = sweeps / 4;
    let cool = sweeps - heat - hold;
    for cycle in 0..base.cycles {
        let mut rng = cycle_rng(base.seed, cycle as u64);
        let mut walker = Walker::new(&dense, q0.to_vec());
        for s in 1..=heat {
            walker.sweep(geometric(temps.lo, peak, s as f64 / heat as f64), &mut rng);
        }
        for _ in 0..hold {
            walker.sweep(peak, &mut rng);
        }
        for s in 0..cool {
            let frac = if cool > 1 {
                s as f64 / (cool - 1) as f64
            } else {
                1.0
            };
            walker.sweep(geometric(peak, temps.lo, frac), &mut rng);
        }
        let energy = dense.energy(&walker.state) + qubo.offset();
        acc.push(walker.state, energy);
    }
    let qpu = TimingModel {
        cycle_us: base.cycle_us,
    }
    .t_rev(1.0, cfg.holding_time, base.cycles as f64);
    Ok(acc.finish(qpu))
}

/// Forward-then-reverse refinement with an adaptive holding time.
///
/// Each attempt is one reverse call from the current point. A strictly
/// better result becomes the new current point and the holding time resets
/// to `cfg.holding_time`; otherwise the holding time doubles, capped at
/// `cfg.holding_max`. Stops after `cfg.max_attempts` calls or once
/// `cfg.target_energy` is reached.
pub fn adaptive_refine(
    qubo: &QuboProblem,
    q0: &[bool],
    cfg: &ReverseConfig,
) -> Result<AnnealOutcome> {
    refine(qubo, q0, cfg, true)
}

/// Repeated reverse annealing at a fixed holding time, moving to each
/// improvement found. Same stopping rules as [`adaptive_refine`].
pub fn iterated_reverse(
    qubo: &QuboProblem,
    q0: &[bool],
    cfg: &ReverseConfig,
) -> Result<AnnealOutcome> {
    refine(qubo, q0, cfg, false)
}

fn refine(
    qubo: &QuboProblem,
    q0: &[bool],
    cfg: &ReverseConfig,
    adaptive: bool,
) -> Result<AnnealOutcome> {
    cfg.validate()?;
    if q0.len() != qubo.n_vars() {
        return Err(Error::Length {
            what: "refinement start state",
            expected: qubo.n_vars(),
            found: q0.len(),
        });
    }
    let mut current = q0.to_vec();
    let mut current_energy = qubo.energy(q0)? + qubo.offset();
    let mut holding = cfg.holding_time;
    let mut samples = Vec::new();
    let mut attempts = Vec::with_capacity(cfg.max_attempts);
    let mut qpu = 0.0;
    let mut reached_target = false;

    for attempt in 0..cfg.max_attempts {
        let call_cfg = ReverseConfig {
            holding_time: holding,
            base: cfg
                .base
                .with_seed(derive_seed(cfg.base.seed, attempt as u64)),
            ..*cfg
        };
        let call = reverse_anneal(qubo, &current, &call_cfg)?;
        qpu += call.modeled_qpu_us;
        let improved = call.best_energy < current_energy - ENERGY_TOLERANCE;
        attempts.push(AttemptRecord {
            holding_time: holding,
            start_energy: current_energy,
            call_energy: call.best_energy,
            improved,
            mean_hamming: call.mean_hamming,
        });
        samples.extend(call.samples);
        if improved {
            current = call.best_q;
            current_energy = call.best_energy;
            holding = cfg.holding_time;
        } else if adaptive {
            holding = (holding * 2.0).min(cfg.holding_max);
        }
        if cfg
            .target_energy
            .is_some_and(|t| current_energy <= t + ENERGY_TOLERANCE)
        {
            reached_target = true;
            break;
        }
    }

    let mean_hamming = attempts.iter().map(|a| a.mean_hamming).sum::<f64>() / attempts.len() as f64;
    Ok(AnnealOutcome {
        best_q: current,
        best_energy: current_energy,
        samples,
        mean_hamming,
        attempts_used: attempts.len(),
        modeled_qpu_us: qpu,
        attempts,
        reached_target,
    })
}

/// Mixes a run seed with an index into an independent seed (SplitMix64).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cycle_rng(seed: u64, cycle: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cycle);
    rng
}

fn geometric(from: f64, to: f64, frac: f64) -> f64 {
    from * libm::pow(to / from, frac)
}

#[derive(Debug, Clone, Copy)]
struct Temperatures {
    hi: f64,
    lo: f64,
}

impl Temperatures {
    fn resolve(qubo: &QuboProblem, cfg: &AnnealConfig) -> Self {
        let hi = cfg.t_initial.unwrap_or_else(|| {
            let scale = qubo.max_flip_scale();
            if scale > 0.0 {
                scale
            } else {
                1.0
            }
        });
        let lo = cfg.t_final.unwrap_or_else(|| {
            qubo.min_nonzero_magnitude()
                .map_or(hi * 1e-3, |m| m * FINAL_TEMPERATURE_FRACTION)
        });
        let lo = if lo < hi { lo } else { hi * 1e-3 };
        Self { hi, lo }
    }

    /// Temperature of sweep `s` out of `sweeps` under geometric cooling; the
    /// last sweep runs at `lo`.
    fn cooling(&self, s: usize, sweeps: usize) -> f64 {
        if sweeps <= 1 {
            return self.lo;
        }
        geometric(self.hi, self.lo, s as f64 / (sweeps - 1) as f64)
    }

    /// Peak reverse temperature, `lo · (hi / lo)^{min(1, T_h / cap)}`.
    fn peak(&self, holding_time: f64, cap: f64) -> f64 {
        geometric(self.lo, self.hi, (holding_time / cap).min(1.0))
    }
}

/// QUBO in dense symmetric form for the inner loops.
struct Dense {
    n: usize,
    linear: Vec<f64>,
    /// `n × n`, symmetric, zero diagonal.
    coupling: Vec<f64>,
}

impl Dense {
    fn new(qubo: &QuboProblem) -> Self {
        let n = qubo.n_vars();
        let mut coupling = vec![0.0; n * n];
        for (&(e, f), &b) in qubo.quadratic() {
            coupling[e * n + f] = b;
            coupling[f * n + e] = b;
        }
        Self {
            n,
            linear: qubo.linear().to_vec(),
            coupling,
        }
    }

    fn energy(&self, q: &[bool]) -> f64 {
        let mut total = 0.0;
        for e in (0..self.n).filter(|&e| q[e]) {
            total += self.linear[e];
            let row = &self.coupling[e * self.n..(e + 1) * self.n];
            total += (e + 1..self.n)
                .filter(|&f| q[f])
                .map(|f| row[f])
                .sum::<f64>();
        }
        total
    }
}

struct Walker<'a> {
    dense: &'a Dense,
    state: Vec<bool>,
    /// `a(e) + Σ_f b(e, f) q_f`: the energy change of switching `e` on.
    field: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(dense: &'a Dense, state: Vec<bool>) -> Self {
        let n = dense.n;
        let field = (0..n)
            .map(|e| {
                let row = &dense.coupling[e * n..(e + 1) * n];
                dense.linear[e]
                    + row
                        .iter()
                        .zip(&state)
                        .filter(|(_, &bit)| bit)
                        .map(|(b, _)| b)
                        .sum::<f64>()
            })
            .collect();
        Self {
            dense,
            state,
            field,
        }
    }

    fn sweep(&mut self, temperature: f64, rng: &mut ChaCha8Rng) {
        let n = self.dense.n;
        for e in 0..n {
            let delta = if self.state[e] {
                -self.field[e]
            } else {
                self.field[e]
            };
            let accept = delta <= 0.0
                || (delta < 40.0 * temperature
                    && rng.random::<f64>() < libm::exp(-delta / temperature));
            if accept {
                self.state[e] = !self.state[e];
                let row = &self.dense.coupling[e * n..(e + 1) * n];
                if self.state[e] {
                    self.field.iter_mut().zip(row).for_each(|(h, b)| *h += b);
                } else {
                    self.field.iter_mut().zip(row).for_each(|(h, b)| *h -= b);
                }
            }
        }
    }
}

/// Collects read results in read order.
struct Accumulator {
    record: bool,
    samples: Vec<Sample>,
    best: Option<(Vec<bool>, f64)>,
    previous: Option<Vec<bool>>,
    hamming_total: usize,
    reads: usize,
}

impl Accumulator {
    fn new(record: bool, start: Option<(Vec<bool>, f64)>) -> Self {
        Self {
            record,
            samples: Vec::new(),
            best: start,
            previous: None,
            hamming_total: 0,
            reads: 0,
        }
    }

    fn push(&mut self, state: Vec<bool>, energy: f64) {
        if let Some(prev) = &self.previous {
            self.hamming_total += hamming(prev, &state);
        }
        self.reads += 1;
        let better = self
            .best
            .as_ref()
            .is_none_or(|(_, b)| energy < b - ENERGY_TOLERANCE);
        if better {
            self.best = Some((state.clone(), energy));
        }
        if self.record {
            self.samples.push(Sample {
                state: state.clone(),
                energy,
            });
        }
        self.previous = Some(state);
    }

    fn finish(self, modeled_qpu_us: f64) -> AnnealOutcome {
        let (best_q, best_energy) = self.best.expect("at least one read");
        let mean_hamming = if self.reads > 1 {
            self.hamming_total as f64 / (self.reads - 1) as f64
        } else {
            0.0
        };
        AnnealOutcome {
            best_q,
            best_energy,
            samples: self.samples,
            mean_hamming,
            attempts_used: 1,
            modeled_qpu_us,
            attempts: Vec::new(),
            reached_target: false,
        }
    }
}

/// Integer value of a state read least-significant bit first.
pub fn state_value(q: &[bool]) -> u64 {
    bits_level(q)
}
