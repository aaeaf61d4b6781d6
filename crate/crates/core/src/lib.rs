//! Univariate estimation-of-distribution algorithms on pseudo-Boolean benchmarks.
//!
//! This crate holds the pure algorithmic part of the lab: the compact genetic
//! algorithm (cGA) on an exact frequency grid, the UMDA baseline, the
//! LeadingOnes and OneMax benchmarks, an exhaustive one-step oracle for the
//! cGA update, and evaluators for the multiplicative, negative and
//! genetic-drift tail bounds together with small synthetic processes that
//! exercise them.
//!
//! It is `no_std` and only needs `alloc`. Positions are 0-based indices
//! throughout the API.
//!
//! ```
//! use edalab_core::{benchmarks::LeadingOnes, cga, model::make_well_behaved};
//!
//! let params = make_well_behaved(8, 100.0).unwrap().params;
//! let result = cga::run_cga(params, &LeadingOnes, 200_000, 1, 0, 1_000);
//! assert!(result.evaluations_used <= 200_000);
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod benchmarks;
pub mod bits;
pub mod cga;
pub mod drift;
mod error;
pub mod model;
pub mod oracle;
pub mod rng;
mod sum;
pub mod umda;

pub use benchmarks::{Benchmark, Fitness, LeadingOnes, OneMax};
pub use bits::BitString;
pub use error::Error;
pub use model::{FrequencyVector, ModelParams};
pub use rng::RandomSource;
pub use sum::CompensatedSum;

pub type Result<T, E = Error> = core::result::Result<T, E>;
