//! Experiment driver for the compact genetic algorithm on LeadingOnes.
//!
//! The algorithms, exact oracle and drift bounds live in `edalab-core`; this
//! crate adds statistics, Monte Carlo bound checks, the experiment tables,
//! configuration files, report formats and the `edalab` command line.

pub mod checks;
pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;
pub mod stats;

pub use edalab_core as core;
