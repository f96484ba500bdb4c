//! Core algorithms for constrained non-negative matrix factorization with an
//! annealing backend.
//!
//! Each row of `W` is encoded as a vector of binary variables (fixed-point,
//! `N + 1` bits per value), turned into a QUBO whose energy equals the
//! penalized row objective, and minimized by simulated forward annealing
//! followed by reverse annealing with an adaptive holding time. `H` is solved
//! column by column with a non-negative least squares solver.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and benchmark harness live in the `qnmf` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
#![warn(rust_2018_idioms, unused_qualifications)]

extern crate alloc;

pub mod als;
pub mod annealer;
pub mod encoding;
mod error;
pub mod linalg;
pub mod nnls;
pub mod qubo;
pub mod timing;

pub use error::{Error, Result};
pub use linalg::Matrix;
