//! QUBO construction for one row of `W`.
//!
//! The row subproblem is
//!
//! ```text
//! f(w) = ‖v − Hᵀ w‖² + λ (1 − Σ_j w_j)²
//! ```
//!
//! Writing `G = H Hᵀ + λ 11ᵀ` and `g = H v + λ 1` gives
//! `f(w) = (‖v‖² + λ) − 2 gᵀw + wᵀ G w`. Substituting `w_j = Σ_e D[j][e] q_e`
//! and using `q_e² = q_e` yields the linear and quadratic coefficients below;
//! `‖v‖² + λ` becomes the offset.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::encoding::{build_d_table, decode_row, DTable, EncodingScheme};
use crate::linalg::{cholesky, cholesky_solve, dot, Matrix};
use crate::{Error, Result};

/// Logical variables available for a fully connected problem on the target
/// annealer.
pub const LOGICAL_VARIABLE_LIMIT: usize = 65;

/// `Σ_e a(e) q_e + Σ_{e<f} b(e,f) q_e q_f`, plus a constant offset that
/// annealers ignore but which recovers the original objective.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboProblem {
    /// An all-zero problem over `n_vars` variables.
    pub fn zeros(n_vars: usize) -> Self {
        Self {
            linear: vec![0.0; n_vars],
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Nonzero couplings keyed by `(e, f)` with `e < f`, in key order.
    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn coupling(&self, e: usize, f: usize) -> f64 {
        let key = if e < f { (e, f) } else { (f, e) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    pub fn set_linear(&mut self, e: usize, value: f64) -> Result<()> {
        if e >= self.n_vars() {
            return Err(Error::InvalidConfig("linear index out of range"));
        }
        self.linear[e] = finite(value)?;
        Ok(())
    }

    /// Sets `b(e, f)`. Keys must satisfy `e < f < n_vars`; zero removes the
    /// entry.
    pub fn set_quadratic(&mut self, e: usize, f: usize, value: f64) -> Result<()> {
        if !(e < f && f < self.n_vars()) {
            return Err(Error::InvalidConfig(
                "quadratic key must satisfy e < f < n_vars",
            ));
        }
        if finite(value)? == 0.0 {
            self.quadratic.remove(&(e, f));
        } else {
            self.quadratic.insert((e, f), value);
        }
        Ok(())
    }

    pub fn set_offset(&mut self, value: f64) -> Result<()> {
        self.offset = finite(value)?;
        Ok(())
    }

    /// Energy without the offset.
    pub fn energy(&self, q: &[bool]) -> Result<f64> {
        if q.len() != self.n_vars() {
            return Err(Error::Length {
                what: "qubo state",
                expected: self.n_vars(),
                found: q.len(),
            });
        }
        let lin: f64 = self
            .linear
            .iter()
            .zip(q)
            .filter(|(_, &bit)| bit)
            .map(|(a, _)| a)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|((e, f), _)| q[*e] && q[*f])
            .map(|(_, b)| b)
            .sum();
        Ok(lin + quad)
    }

    /// Largest `|a(e)| + Σ_f |b(e,f)|` over all variables: the biggest energy
    /// change a single flip can cause.
    pub fn max_flip_scale(&self) -> f64 {
        let mut row = self.linear.iter().map(|a| a.abs()).collect::<Vec<_>>();
        for (&(e, f), b) in &self.quadratic {
            row[e] += b.abs();
            row[f] += b.abs();
        }
        row.into_iter().fold(0.0, f64::max)
    }

    /// Smallest nonzero coefficient magnitude, if any.
    pub fn min_nonzero_magnitude(&self) -> Option<f64> {
        self.linear
            .iter()
            .chain(self.quadratic.values())
            .map(|x| x.abs())
            .filter(|&x| x > 0.0)
            .reduce(f64::min)
    }
}

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite {
            what: "qubo coefficient",
        })
    }
}

/// `Σ_e a(e) q_e + Σ_{e<f} b(e,f) q_e q_f` (offset not included).
pub fn qubo_energy(qubo: &QuboProblem, q: &[bool]) -> Result<f64> {
    qubo.energy(q)
}

/// One row subproblem: find `w` with `Hᵀ w ≈ v` and `Σ w ≈ 1`.
#[derive(Debug, Clone)]
pub struct RowProblem {
    h: Matrix,
    v_row: Vec<f64>,
    lambda: f64,
    scheme: EncodingScheme,
}

impl RowProblem {
    pub fn new(h: Matrix, v_row: Vec<f64>, lambda: f64, scheme: EncodingScheme) -> Result<Self> {
        if h.rows() != scheme.rank() {
            return Err(Error::Shape {
                op: "row problem (H rows vs rank)",
                left: h.shape(),
                right: (scheme.rank(), h.cols()),
            });
        }
        if v_row.len() != h.cols() {
            return Err(Error::Length {
                what: "V row",
                expected: h.cols(),
                found: v_row.len(),
            });
        }
        if v_row.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "V row" });
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidConfig(
                "penalty weight must be finite and >= 0",
            ));
        }
        Ok(Self {
            h,
            v_row,
            lambda,
            scheme,
        })
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn v_row(&self) -> &[f64] {
        &self.v_row
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn scheme(&self) -> &EncodingScheme {
        &self.scheme
    }

    /// `G = H Hᵀ + λ 11ᵀ`, row-major `k × k`.
    fn gram(&self) -> Vec<f64> {
        let k = self.scheme.rank();
        let mut g = vec![0.0; k * k];
        for j in 0..k {
            for l in 0..k {
                g[j * k + l] = dot(self.h.row(j), self.h.row(l)) + self.lambda;
            }
        }
        g
    }

    /// `g = H v + λ 1`.
    fn target(&self) -> Vec<f64> {
        (0..self.scheme.rank())
            .map(|j| dot(self.h.row(j), &self.v_row) + self.lambda)
            .collect()
    }

    /// `‖v‖² + λ`, the objective at `w = 0`.
    fn constant(&self) -> f64 {
        dot(&self.v_row, &self.v_row) + self.lambda
    }
}

/// `‖v − Hᵀ w‖² + λ (1 − Σ_j w_j)²`, evaluated directly.
///
/// # Panics
///
/// If `w.len()` differs from the rank.
pub fn row_objective(p: &RowProblem, w: &[f64]) -> f64 {
    assert_eq!(w.len(), p.scheme.rank(), "w must have one entry per rank");
    let data: f64 = (0..p.h.cols())
        .map(|t| {
            let fit: f64 = w.iter().enumerate().map(|(j, wj)| p.h.get(j, t) * wj).sum();
            let r = p.v_row[t] - fit;
            r * r
        })
        .sum();
    let slack = 1.0 - w.iter().sum::<f64>();
    data + p.lambda * slack * slack
}

/// Builds the QUBO whose energy plus offset equals [`row_objective`] at the
/// decoded row, for every bit-vector.
pub fn build_row_qubo(p: &RowProblem) -> QuboProblem {
    let k = p.scheme.rank();
    let d = build_d_table(&p.scheme);
    let n = d.n_vars();
    let gram = p.gram();
    let target = p.target();

    // D is block diagonal, so precompute each qubit's owning value and weight.
    let (owner, weight): (Vec<usize>, Vec<f64>) = (0..n)
        .map(|e| {
            let j = (0..k).find(|&j| d.get(j, e) != 0.0).unwrap_or(0);
            (j, d.get(j, e))
        })
        .unzip();
    debug_assert!(check_block_structure(&d, &owner));

    let mut qubo = QuboProblem::zeros(n);
    for e in 0..n {
        let (j, de) = (owner[e], weight[e]);
        qubo.linear[e] = gram[j * k + j] * de * de - 2.0 * target[j] * de;
        for f in e + 1..n {
            let b = 2.0 * gram[j * k + owner[f]] * de * weight[f];
            if b != 0.0 {
                qubo.quadratic.insert((e, f), b);
            }
        }
    }
    qubo.offset = p.constant();
    qubo
}

fn check_block_structure(d: &DTable, owner: &[usize]) -> bool {
    (0..d.n_vars()).all(|e| (0..d.rank()).all(|j| j == owner[e] || d.get(j, e) == 0.0))
}

/// Fails when `k (N + 1)` logical variables exceed `limit`.
pub fn check_variable_budget(scheme: &EncodingScheme, limit: usize) -> Result<()> {
    let required = scheme.n_vars();
    if required > limit {
        return Err(Error::Budget {
            required,
            available: limit,
        });
    }
    Ok(())
}

/// Exact minimizer of a row problem over the encoding grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub levels: Vec<u64>,
    pub w: Vec<f64>,
    pub objective: f64,
}

/// Upper bound on enumeration nodes [`grid_minimum`] will visit.
pub const GRID_SEARCH_CAP: u64 = 50_000_000;

/// Exact grid minimizer of the row objective, without annealing.
///
/// The objective is `f* + (w − w*)ᵀ G (w − w*)` with `w* = G⁻¹ g`, so grid
/// points better than an incumbent lie inside an ellipsoid around `w*`. The
/// points of that ellipsoid are enumerated coordinate by coordinate through
/// the Cholesky factor of `G` (Fincke–Pohst), nearest levels first, shrinking
/// the radius whenever a better point turns up. Requires `G` to be positive
/// definite, which holds whenever `λ > 0` or `H` has full row rank.
pub fn grid_minimum(p: &RowProblem) -> Result<GridOptimum> {
    let k = p.scheme.rank();
    let gram = p.gram();
    let target = p.target();
    let center = cholesky_solve(&gram, k, &target)?;
    let chol = cholesky(&gram, k)?;
    let f_star = p.constant() - dot(&target, &center);

    let max_level = p.scheme.max_level();
    let c = p.scheme.scale();
    let rounded: Vec<u64> = center
        .iter()
        .map(|&x| libm::round(x / c).clamp(0.0, max_level as f64) as u64)
        .collect();
    let incumbent = row_objective(p, &levels_to_values(&rounded, &p.scheme));

    let mut search = SphereSearch {
        problem: p,
        chol,
        center,
        f_star,
        best_levels: rounded,
        best_value: incumbent,
        levels: vec![0; k],
        offsets: vec![0.0; k],
        nodes: 0,
    };
    search.visit(k, 0.0)?;
    let w = levels_to_values(&search.best_levels, &p.scheme);
    Ok(GridOptimum {
        levels: search.best_levels,
        w,
        objective: search.best_value,
    })
}

struct SphereSearch<'a> {
    problem: &'a RowProblem,
    /// Lower Cholesky factor of `G`.
    chol: Vec<f64>,
    center: Vec<f64>,
    f_star: f64,
    best_levels: Vec<u64>,
    best_value: f64,
    levels: Vec<u64>,
    /// `w_j − w*_j` for already fixed coordinates.
    offsets: Vec<f64>,
    nodes: u64,
}

impl SphereSearch<'_> {
    fn radius_sq(&self) -> f64 {
        (self.best_value - self.f_star).max(0.0) + 1e-12 * (1.0 + self.best_value.abs())
    }

    /// Fixes coordinate `i - 1` given coordinates `i..k`; `acc` is the part of
    /// the quadratic form they contribute.
    fn visit(&mut self, i: usize, acc: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > GRID_SEARCH_CAP {
            return Err(Error::TooLarge {
                n_vars: self.nodes as usize,
                cap: GRID_SEARCH_CAP as usize,
            });
        }
        let scheme = self.problem.scheme;
        if i == 0 {
            let value = row_objective(self.problem, &levels_to_values(&self.levels, &scheme));
            if value < self.best_value {
                self.best_value = value;
                self.best_levels.clone_from(&self.levels);
            }
            return Ok(());
        }
        let k = scheme.rank();
        let i = i - 1;
        let diag = self.chol[i * k + i];
        let coupled: f64 = (i + 1..k)
            .map(|j| self.chol[j * k + i] * self.offsets[j])
            .sum();
        let mid = self.center[i] - coupled / diag;
        let c = scheme.scale();
        let max_level = scheme.max_level() as f64;
        let half = libm::sqrt((self.radius_sq() - acc).max(0.0)) / diag;
        let lo = (libm::floor((mid - half) / c) - 1.0).clamp(0.0, max_level) as u64;
        let hi = (libm::ceil((mid + half) / c) + 1.0).clamp(0.0, max_level) as u64;
        if lo > hi {
            return Ok(());
        }
        // zig-zag outward from the level nearest the ellipsoid center
        let start = libm::round(mid / c).clamp(lo as f64, hi as f64) as u64;
        let mut order = Vec::with_capacity((hi - lo + 1) as usize);
        order.push(start);
        for d in 1..=(hi - lo) {
            if let Some(l) = start.checked_add(d).filter(|&l| l <= hi) {
                order.push(l);
            }
            if let Some(l) = start.checked_sub(d).filter(|&l| l >= lo) {
                order.push(l);
            }
        }
        for level in order {
            let offset = scheme.level_value(level) - self.center[i];
            let term = diag * offset + coupled;
            let next = acc + term * term;
            if next > self.radius_sq() {
                continue;
            }
            self.levels[i] = level;
            self.offsets[i] = offset;
            self.visit(i, next)?;
        }
        Ok(())
    }
}

fn levels_to_values(levels: &[u64], scheme: &EncodingScheme) -> Vec<f64> {
    levels.iter().map(|&l| scheme.level_value(l)).collect()
}

/// Row objective of a bit-vector, through the decoded row.
pub fn objective_of_state(p: &RowProblem, q: &[bool]) -> Result<f64> {
    let w = decode_row(q, &build_d_table(&p.scheme))?;
    Ok(row_objective(p, &w))
}
