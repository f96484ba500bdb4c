//! Non-negative least squares, `min ‖A x − b‖₂ s.t. x ≥ 0`, by the
//! Lawson–Hanson active-set method.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{dot, norm2, Matrix};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsResult {
    /// Solution, every entry `>= 0.0`.
    pub x: Vec<f64>,
    /// `‖A x − b‖₂` at the returned `x`.
    pub residual: f64,
    /// Outer (active-set) iterations performed.
    pub iterations: usize,
    pub converged: bool,
}

/// `3 · n_cols`, the customary outer iteration budget.
pub fn default_max_iter(n_cols: usize) -> usize {
    3 * n_cols
}

/// Solves `min ‖A x − b‖₂` subject to `x ≥ 0`.
///
/// Hitting `max_iter` is not an error; the result then has
/// `converged == false`. Zero columns of `A` never enter the passive set and
/// stay pinned at 0.
pub fn nnls_solve(a: &Matrix, b: &[f64], tol: f64, max_iter: usize) -> Result<NnlsResult> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::Shape {
            op: "nnls",
            left: a.shape(),
            right: (b.len(), 1),
        });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidConfig("nnls tolerance must be positive"));
    }
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what: "nnls rhs" });
    }
    let columns: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();

    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut grad = negative_gradient(&columns, b, &x);

    while iterations < max_iter {
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(t) = candidate.filter(|&t| grad[t] > tol) else {
            converged = true;
            break;
        };
        iterations += 1;
        passive[t] = true;

        // Inner loop: keep the passive solution strictly feasible.
        let mut first = true;
        loop {
            let set: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z_set = least_squares(&columns, &set, b);
            if first && z_set[set.iter().position(|&j| j == t).unwrap()] <= 0.0 {
                // The entering column does not help numerically; drop it and
                // stop considering it this round.
                passive[t] = false;
                grad[t] = 0.0;
                break;
            }
            first = false;
            if z_set.iter().all(|&z| z > 0.0) {
                for (&j, &z) in set.iter().zip(&z_set) {
                    x[j] = z;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&j, &z) in set.iter().zip(&z_set) {
                if z <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z));
                }
            }
            for (&j, &z) in set.iter().zip(&z_set) {
                x[j] += alpha * (z - x[j]);
                if x[j] <= 0.0 || (z <= 0.0 && x[j] <= f64::EPSILON * (1.0 + z.abs())) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        if grad[t] != 0.0 || passive[t] {
            grad = negative_gradient(&columns, b, &x);
        }
    }
    if !converged && (0..n).all(|j| passive[j] || grad[j] <= tol) {
        converged = true;
    }

    for xi in &mut x {
        if *xi < 0.0 {
            *xi = 0.0;
        }
    }
    let residual = norm2(&residual_vector(&columns, b, &x));
    Ok(NnlsResult {
        x,
        residual,
        iterations,
        converged,
    })
}

/// One column of `H` given `W`: `min ‖v − W h‖₂`, `h ≥ 0`.
pub fn solve_h_column(w: &Matrix, v_col: &[f64]) -> Result<Vec<f64>> {
    Ok(nnls_solve(w, v_col, DEFAULT_TOL, default_max_iter(w.cols()))?.x)
}

/// `min ‖v − Hᵀ w‖² + λ (1 − Σ w)²` over `w ≥ 0`, by appending the row
/// `√λ · 1ᵀ` to `Hᵀ` and `√λ` to `v`.
pub fn solve_penalized_row(h: &Matrix, v_row: &[f64], lambda: f64) -> Result<NnlsResult> {
    let (k, m) = h.shape();
    if v_row.len() != m {
        return Err(Error::Length {
            what: "V row",
            expected: m,
            found: v_row.len(),
        });
    }
    let root = libm::sqrt(lambda);
    let mut data = h.transpose().as_slice().to_vec();
    data.extend(core::iter::repeat_n(root, k));
    let a = Matrix::new(m + 1, k, data)?;
    let mut b = v_row.to_vec();
    b.push(root);
    nnls_solve(&a, &b, DEFAULT_TOL, default_max_iter(k))
}

fn residual_vector(columns: &[Vec<f64>], b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = b.to_vec();
    for (col, &xj) in columns.iter().zip(x) {
        if xj != 0.0 {
            for (ri, aij) in r.iter_mut().zip(col) {
                *ri -= aij * xj;
            }
        }
    }
    r
}

/// `Aᵀ (b − A x)`.
fn negative_gradient(columns: &[Vec<f64>], b: &[f64], x: &[f64]) -> Vec<f64> {
    let r = residual_vector(columns, b, x);
    columns.iter().map(|col| dot(col, &r)).collect()
}

/// Unconstrained least squares on the columns in `set`, by Householder QR.
/// Numerically dependent columns get coefficient 0.
fn least_squares(columns: &[Vec<f64>], set: &[usize], b: &[f64]) -> Vec<f64> {
    let m = b.len();
    let p = set.len();
    let mut q: Vec<Vec<f64>> = set.iter().map(|&j| columns[j].clone()).collect();
    let mut rhs = b.to_vec();
    let scale = q.iter().map(|c| norm2(c)).fold(0.0, f64::max);
    let mut diag = vec![0.0; p];

    let steps = p.min(m);
    for k in 0..steps {
        let alpha = norm2(&q[k][k..]);
        if alpha <= 1e-13 * scale {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if q[k][k] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = q[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        diag[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        for col in q.iter_mut().skip(k + 1) {
            let s = 2.0 * dot(&v, &col[k..]) / vnorm2;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        let s = 2.0 * dot(&v, &rhs[k..]) / vnorm2;
        for (c, vi) in rhs[k..].iter_mut().zip(&v) {
            *c -= s * vi;
        }
    }

    let mut z = vec![0.0; p];
    for k in (0..steps).rev() {
        if diag[k] == 0.0 {
            continue;
        }
        let s: f64 = (k + 1..p).map(|l| q[l][k] * z[l]).sum();
        z[k] = (rhs[k] - s) / diag[k];
    }
    z
}
