//! Small dense matrices in row-major order.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Dense row-major real matrix. Every entry is finite.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::Length {
                what: "matrix data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "matrix data",
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Length {
                    what: "matrix row",
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// # Panics
    ///
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copies column `j` out.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Overwrites row `i`. Values must be finite.
    pub fn set_row(&mut self, i: usize, values: &[f64]) -> Result<()> {
        check_len("row", self.cols, values.len())?;
        check_finite("row", values)?;
        self.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(values);
        Ok(())
    }

    /// Overwrites column `j`. Values must be finite.
    pub fn set_column(&mut self, j: usize, values: &[f64]) -> Result<()> {
        check_len("column", self.rows, values.len())?;
        check_finite("column", values)?;
        for (i, &v) in values.iter().enumerate() {
            self.data[i * self.cols + j] = v;
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            data.extend((0..self.rows).map(|i| self.get(i, j)));
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x * c).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                op: "sub",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(self.rows, self.cols, data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        f.write_str("]")
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Length {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

fn check_finite(what: &'static str, values: &[f64]) -> Result<()> {
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what });
    }
    Ok(())
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::Shape {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut data = vec![0.0; a.rows * b.cols];
    for i in 0..a.rows {
        let out = &mut data[i * b.cols..(i + 1) * b.cols];
        for (l, &ail) in a.row(i).iter().enumerate() {
            for (o, &blj) in out.iter_mut().zip(b.row(l)) {
                *o += ail * blj;
            }
        }
    }
    Matrix::new(a.rows, b.cols, data)
}

/// Square root of the sum of squared entries.
pub fn frobenius_norm(m: &Matrix) -> f64 {
    norm2(&m.data)
}

/// `‖V − W·H‖_F`.
pub fn residual_norm(v: &Matrix, w: &Matrix, h: &Matrix) -> Result<f64> {
    let wh = matmul(w, h)?;
    if wh.shape() != v.shape() {
        return Err(Error::Shape {
            op: "residual_norm",
            left: v.shape(),
            right: wh.shape(),
        });
    }
    Ok(frobenius_norm(&v.sub(&wh)?))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm, rescaled so that large entries do not overflow.
pub(crate) fn norm2(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * libm::sqrt(sum)
}

/// Lower Cholesky factor `L` of a symmetric positive definite `G`
/// (row-major, `n × n`), with `G = L Lᵀ`.
pub(crate) fn cholesky(g: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = g[i * n + j] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::Singular);
                }
                l[i * n + i] = libm::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solves `G x = rhs` for a symmetric positive definite `G`.
pub(crate) fn cholesky_solve(g: &[f64], n: usize, rhs: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(g, n)?;
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (rhs[i] - dot(&l[i * n..i * n + i], &y[..i])) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn matmul_examples() {
        let b = m(&[&[1.5, -2.0], &[0.25, 4.0]]);
        assert_eq!(matmul(&Matrix::identity(2), &b).unwrap(), b);
        assert_eq!(
            matmul(&Matrix::zeros(2, 2), &b).unwrap(),
            Matrix::zeros(2, 2)
        );
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let ones = m(&[&[1.0], &[1.0]]);
        assert_eq!(matmul(&a, &ones).unwrap(), m(&[&[3.0], &[7.0]]));
    }

    #[test]
    fn matmul_reports_both_shapes() {
        let err = matmul(&Matrix::zeros(2, 3), &Matrix::zeros(2, 3)).unwrap_err();
        assert_eq!(
            err,
            Error::Shape {
                op: "matmul",
                left: (2, 3),
                right: (2, 3)
            }
        );
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&Matrix::zeros(3, 2)), 0.0);
        assert_eq!(frobenius_norm(&m(&[&[3.0, 4.0]])), 5.0);
        assert_eq!(frobenius_norm(&m(&[&[1.0, 1.0], &[1.0, 1.0]])), 2.0);
    }

    #[test]
    fn residual_examples() {
        let w = m(&[&[0.2, 0.8], &[0.5, 0.5]]);
        let h = m(&[&[1.0, 2.0, 0.0], &[0.5, 0.0, 3.0]]);
        let v = matmul(&w, &h).unwrap();
        assert_eq!(residual_norm(&v, &w, &h).unwrap(), 0.0);
        let zero = Matrix::zeros(2, 2);
        assert_eq!(residual_norm(&v, &zero, &h).unwrap(), frobenius_norm(&v));
        assert!(residual_norm(&Matrix::zeros(3, 3), &w, &h).is_err());
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::new(0, 2, vec![]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let g = [4.0, 1.0, 1.0, 3.0];
        let x = cholesky_solve(&g, 2, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        assert_eq!(
            cholesky_solve(&[1.0, 1.0, 1.0, 1.0], 2, &[1.0, 1.0]),
            Err(Error::Singular)
        );
    }

    fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-10.0f64..10.0, rows * cols)
            .prop_map(move |d| Matrix::new(rows, cols, d).unwrap())
    }

    proptest! {
        #[test]
        fn frobenius_is_absolutely_homogeneous(a in matrix(3, 4), c in -100.0f64..100.0) {
            let lhs = frobenius_norm(&a.scaled(c).unwrap());
            let rhs = c.abs() * frobenius_norm(&a);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn residual_invariant_under_rank_permutation(
            v in matrix(3, 4), w in matrix(3, 3), h in matrix(3, 4), perm in Just([2usize, 0, 1])
        ) {
            let mut wp = Matrix::zeros(3, 3);
            let mut hp = Matrix::zeros(3, 4);
            for (new, &old) in perm.iter().enumerate() {
                wp.set_column(new, &w.column(old)).unwrap();
                hp.set_row(new, h.row(old)).unwrap();
            }
            let r0 = residual_norm(&v, &w, &h).unwrap();
            let r1 = residual_norm(&v, &wp, &hp).unwrap();
            prop_assert!((r0 - r1).abs() <= 1e-12 * (1.0 + r0));
        }

        #[test]
        fn matmul_is_associative(a in matrix(2, 3), b in matrix(3, 4), c in matrix(4, 2)) {
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            let diff = frobenius_norm(&left.sub(&right).unwrap());
            prop_assert!(diff <= 1e-10 * (1.0 + frobenius_norm(&left)));
        }
    }
}
