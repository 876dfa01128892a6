use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::emit_plots;
use crate::records::RecordWriter;
use crate::summary::SweepSummary;
use crate::trial::{run_trial_set, trial_seed, Cell, TrialRecord, TrialSettings};

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug)]
pub struct SweepOutput {
    pub summary: SweepSummary,
    pub records: Vec<TrialRecord>,
    pub records_path: PathBuf,
    pub summary_path: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Cells in sweep order: `n` outer, σ inner.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &n in &cfg.n_values {
        for sigma_index in 0..cfg.sigma_spec.len() {
            let (sigma, multiplier) = cfg.sigma_spec.resolve(n, sigma_index);
            out.push(Cell {
                n,
                sigma_index,
                sigma,
                multiplier,
                kind: cfg.noise_kind,
            });
        }
    }
    out
}

/// Run every cell × trial, appending each finished cell to `records.csv`,
/// then write `summary.json` and the plots.
///
/// Trials of a cell run on the worker pool and are written in trial order,
/// so the output does not depend on the worker count.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let records_path = dir.join(RECORDS_FILE);
    let mut writer = RecordWriter::create(&records_path)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Validation(format!("worker pool: {e}")))?;
    let settings = TrialSettings {
        estimators: cfg.estimators(),
        aux_m_count: cfg.aux_m_count,
        certify: cfg.certify,
        timing: cfg.timing,
    };

    let mut records = Vec::new();
    for cell in cells(cfg) {
        let batch: Vec<TrialRecord> = pool.install(|| {
            (0..cfg.trials_per_cell)
                .into_par_iter()
                .map(|t| {
                    let seed = trial_seed(cfg.base_seed, cell.n, cell.sigma_index, t);
                    run_trial_set(&cell, &settings, t, seed)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect()
        });
        writer.write_batch(&batch)?;
        records.extend(batch);
    }

    let summary = SweepSummary::from_records(&records, Some(cfg.clone()));
    let summary_path = dir.join(SUMMARY_FILE);
    summary.write(&summary_path)?;
    let plots = emit_plots(&records, dir)?;
    Ok(SweepOutput {
        summary,
        records,
        records_path,
        summary_path,
        plots,
    })
}

/// Write plots for an existing `records.csv` into `out_dir`.
pub fn plot_from_file(records: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let rs = crate::records::read_records(records)?;
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    emit_plots(&rs, out_dir)
}
