//! Experiment engine for `phasesync`: seeded Monte-Carlo sweeps over
//! `(n, σ)`, per-trial records, summaries, SVG plots and instance files.

pub mod config;
pub mod error;
pub mod instance;
pub mod plot;
pub mod records;
pub mod stats;
pub mod summary;
pub mod sweep;
pub mod trial;

pub use config::{Estimator, ExperimentConfig, SigmaSpec};
pub use error::{HarnessError, Result};
pub use summary::SweepSummary;
pub use sweep::run_sweep;
pub use trial::{run_trial, TrialRecord};
