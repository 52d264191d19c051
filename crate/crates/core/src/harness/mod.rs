//! Experiment runners: exhaustive checks, sweeps and empirical constants.

pub mod classification;
pub mod cube;
pub mod decoder;
pub mod formulas;
pub mod sweep;

pub use sweep::{envelope, run_sweep, Grid, OutputFormat, SweepConfig, SweepOutcome, Target};
