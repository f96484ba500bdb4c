//! Annealer (QPU) time model.
//!
//! Only anneal time is modeled: programming, readout and network latency are
//! excluded. All quantities are in microseconds.

use crate::{Error, Result};

/// Anneal duration per cycle on the current hardware generation.
pub const DEFAULT_CYCLE_US: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    pub cycle_us: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self {
            cycle_us: DEFAULT_CYCLE_US,
        }
    }
}

impl TimingModel {
    /// Time of `n_calls` reverse-annealing calls of `n_cycles` cycles each,
    /// every cycle lasting the holding time plus one anneal.
    pub fn t_rev(&self, n_calls: f64, t_h: f64, n_cycles: f64) -> f64 {
        n_calls * (t_h + self.cycle_us) * n_cycles
    }

    /// A plain forward call is a reverse call with zero holding time.
    pub fn t_forward(&self, n_cycles: f64) -> f64 {
        self.t_rev(1.0, 0.0, n_cycles)
    }
}

pub fn t_rev(n_calls: f64, t_h: f64, n_cycles: f64) -> f64 {
    TimingModel::default().t_rev(n_calls, t_h, n_cycles)
}

/// Whole factorization: every iteration solves every row.
pub fn t_factorization(n_iterations: f64, n_rows: f64, t_rev_us: f64) -> f64 {
    n_iterations * n_rows * t_rev_us
}

/// Inputs of the time model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingParams {
    pub n_calls: f64,
    pub t_h: f64,
    pub n_cycles: f64,
    pub n_iterations: f64,
    pub n_rows: f64,
    pub cycle_us: f64,
}

impl TimingParams {
    /// 50 calls at the 200 µs holding cap, 10000 cycles, 50 iterations over a
    /// two-row matrix.
    pub fn worst_case() -> Self {
        Self {
            n_calls: 50.0,
            t_h: 200.0,
            n_cycles: 10_000.0,
            n_iterations: 50.0,
            n_rows: 2.0,
            cycle_us: DEFAULT_CYCLE_US,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.n_calls,
            self.t_h,
            self.n_cycles,
            self.n_iterations,
            self.n_rows,
            self.cycle_us,
        ];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidConfig(
                "timing parameters must be finite and non-negative",
            ));
        }
        Ok(())
    }

    pub fn t_rev_us(&self) -> f64 {
        TimingModel {
            cycle_us: self.cycle_us,
        }
        .t_rev(self.n_calls, self.t_h, self.n_cycles)
    }

    pub fn t_factorization_us(&self) -> f64 {
        t_factorization(self.n_iterations, self.n_rows, self.t_rev_us())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reverse_time_examples() {
        assert_eq!(t_rev(50.0, 200.0, 10_000.0), 100_500_000.0);
        assert_eq!(t_rev(0.0, 137.0, 10_000.0), 0.0);
        assert_eq!(t_rev(1.0, 0.0, 10_000.0), 10_000.0);
    }

    #[test]
    fn factorization_time_examples() {
        let total = t_factorization(50.0, 2.0, t_rev(50.0, 200.0, 10_000.0));
        assert_eq!(total / 1e6, 10_050.0);
        assert_eq!(alloc::format!("{:.2}", total / 3.6e9), "2.79");
        assert_eq!(t_factorization(0.0, 2.0, 5.0), 0.0);
        assert_eq!(t_factorization(1.0, 1.0, 10_000.0), 10_000.0);
    }

    #[test]
    fn slower_hardware_cycle() {
        let model = TimingModel { cycle_us: 20.0 };
        assert_eq!(model.t_forward(10_000.0), 200_000.0);
    }

    #[test]
    fn negative_parameters_rejected() {
        let mut p = TimingParams::worst_case();
        assert!(p.validate().is_ok());
        p.t_h = -1.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn linear_in_each_argument(
            a in 0.0f64..100.0, b in 0.0f64..300.0, c in 0.0f64..1e4, s in 0.0f64..10.0
        ) {
            let base = t_rev(a, b, c);
            let tol = 1e-9 * (1.0 + base * s);
            prop_assert!((t_rev(a * s, b, c) - s * base).abs() <= tol);
            prop_assert!((t_rev(a, b, c * s) - s * base).abs() <= tol);
            // affine in the holding time: (T_h + 1) scales
            prop_assert!((t_rev(a, s * (b + 1.0) - 1.0, c) - s * base).abs() <= 1e-6 * (1.0 + base * s));
            let f = t_factorization(a, b, c);
            prop_assert!((t_factorization(a * s, b, c) - s * f).abs() <= 1e-9 * (1.0 + f * s));
            prop_assert!((t_factorization(a, b * s, c) - s * f).abs() <= 1e-9 * (1.0 + f * s));
            prop_assert!((t_factorization(a, b, c * s) - s * f).abs() <= 1e-9 * (1.0 + f * s));
        }
    }
}
