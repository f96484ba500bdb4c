//! Fixed-point binary encoding of non-negative reals.
//!
//! A value is `c · Σ_b 2^b q_b` for `b = 0..=N`, so each value uses `N + 1`
//! binary variables and covers `[0, c · (2^{N+1} − 1)]` on a grid of step `c`.
//! A row of `k` values is a flat vector of `k (N + 1)` variables where value
//! `j` owns the contiguous block `j (N + 1) ..= j (N + 1) + N`. Bits are
//! least-significant first everywhere.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Widest supported value encoding; keeps every grid level exact in an `f64`.
pub const MAX_BITS_PER_VALUE: u32 = 40;

/// Fixed-point parameters `(c, N, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingScheme {
    scale: f64,
    top_bit: u32,
    rank: usize,
}

impl Default for EncodingScheme {
    /// `c = 0.001`, ten bits per value, rank 3.
    fn default() -> Self {
        Self {
            scale: 0.001,
            top_bit: 9,
            rank: 3,
        }
    }
}

impl EncodingScheme {
    /// `scale` is the grid step `c`, `top_bit` the highest bit index `N`,
    /// `rank` the number of values per row `k`.
    pub fn new(scale: f64, top_bit: u32, rank: usize) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidConfig("encoding scale must be positive"));
        }
        if top_bit + 1 > MAX_BITS_PER_VALUE {
            return Err(Error::InvalidConfig("too many bits per value"));
        }
        if rank == 0 {
            return Err(Error::InvalidConfig("rank must be at least 1"));
        }
        Ok(Self {
            scale,
            top_bit,
            rank,
        })
    }

    pub fn with_rank(self, rank: usize) -> Result<Self> {
        Self::new(self.scale, self.top_bit, rank)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn top_bit(&self) -> u32 {
        self.top_bit
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn bits_per_value(&self) -> usize {
        self.top_bit as usize + 1
    }

    /// Total number of binary variables for one row, `k (N + 1)`.
    pub fn n_vars(&self) -> usize {
        self.rank * self.bits_per_value()
    }

    /// Largest integer level, `2^{N+1} − 1`.
    pub fn max_level(&self) -> u64 {
        (1u64 << self.bits_per_value()) - 1
    }

    pub fn max_value(&self) -> f64 {
        self.level_value(self.max_level())
    }

    /// Real value of an integer grid level.
    pub fn level_value(&self, level: u64) -> f64 {
        self.scale * level as f64
    }

    /// Nearest grid level, rounding halves up. Fails outside the range.
    pub fn level_of(&self, x: f64) -> Result<u64> {
        let max = self.max_value();
        // Tolerate representation error in values printed on the grid.
        let slack = self.scale * 1e-9;
        if !x.is_finite() || x < 0.0 || x > max + slack {
            return Err(Error::OutOfRange {
                value: x,
                min: 0.0,
                max,
            });
        }
        let level = libm::floor(x / self.scale + 0.5) as u64;
        Ok(level.min(self.max_level()))
    }

    /// Range of qubit indices owned by value `j`.
    pub fn block(&self, j: usize) -> core::ops::Range<usize> {
        let b = self.bits_per_value();
        j * b..(j + 1) * b
    }
}

/// Bits of `round(x / c)`, least significant first.
pub fn encode_value(x: f64, scheme: &EncodingScheme) -> Result<Vec<bool>> {
    let level = scheme.level_of(x)?;
    Ok(level_bits(level, scheme.bits_per_value()))
}

/// `c · Σ 2^b q_b`.
pub fn decode_bits(q: &[bool], scheme: &EncodingScheme) -> Result<f64> {
    if q.len() != scheme.bits_per_value() {
        return Err(Error::Length {
            what: "encoded value",
            expected: scheme.bits_per_value(),
            found: q.len(),
        });
    }
    Ok(scheme.level_value(bits_level(q)))
}

/// Encodes a whole row of `k` values into `k (N + 1)` bits.
pub fn encode_row(w: &[f64], scheme: &EncodingScheme) -> Result<Vec<bool>> {
    if w.len() != scheme.rank() {
        return Err(Error::Length {
            what: "row",
            expected: scheme.rank(),
            found: w.len(),
        });
    }
    let mut q = Vec::with_capacity(scheme.n_vars());
    for &x in w {
        q.extend(encode_value(x, scheme)?);
    }
    Ok(q)
}

/// Integer grid levels of each value in a flat row encoding.
pub fn row_levels(q: &[bool], scheme: &EncodingScheme) -> Result<Vec<u64>> {
    if q.len() != scheme.n_vars() {
        return Err(Error::Length {
            what: "row encoding",
            expected: scheme.n_vars(),
            found: q.len(),
        });
    }
    Ok(q.chunks(scheme.bits_per_value()).map(bits_level).collect())
}

pub(crate) fn level_bits(level: u64, bits: usize) -> Vec<bool> {
    (0..bits).map(|b| (level >> b) & 1 == 1).collect()
}

pub(crate) fn bits_level(q: &[bool]) -> u64 {
    q.iter()
        .enumerate()
        .fold(0u64, |acc, (b, &bit)| acc | (u64::from(bit) << b))
}

/// Coefficients mapping the flat qubit vector to the `k` values of a row:
/// `D[j][e] = 2^{e − j(N+1)} · c` when `e` lies in block `j`, else 0.
///
/// The table is the same for every row of `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct DTable {
    rank: usize,
    n_vars: usize,
    values: Vec<f64>,
}

impl DTable {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn get(&self, j: usize, e: usize) -> f64 {
        self.values[j * self.n_vars + e]
    }
}

pub fn build_d_table(scheme: &EncodingScheme) -> DTable {
    let n_vars = scheme.n_vars();
    let mut values = vec![0.0; scheme.rank() * n_vars];
    for j in 0..scheme.rank() {
        let block = scheme.block(j);
        let start = block.start;
        for e in block {
            values[j * n_vars + e] = libm::ldexp(scheme.scale(), (e - start) as i32);
        }
    }
    DTable {
        rank: scheme.rank(),
        n_vars,
        values,
    }
}

/// `w_j = Σ_e D[j][e] q_e`.
pub fn decode_row(q: &[bool], d: &DTable) -> Result<Vec<f64>> {
    if q.len() != d.n_vars {
        return Err(Error::Length {
            what: "row encoding",
            expected: d.n_vars,
            found: q.len(),
        });
    }
    Ok((0..d.rank)
        .map(|j| {
            q.iter()
                .enumerate()
                .filter(|(_, &bit)| bit)
                .map(|(e, _)| d.get(j, e))
                .sum()
        })
        .collect())
}
