use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phasesync::certificate::{verify_optimality, CertificateTolerances};
use phasesync::gpm::{phase_project, run_gpm, GpmConfig};
use phasesync::lina::{leading_eigpair_with, spectral_norm, EigOptions};
use phasesync::metrics::{aligned_linf, d2};
use phasesync::model::{MeasurementModel, NoiseKind};
use phasesync_harness::config::regime_scale;
use phasesync_harness::instance::{read_candidate, write_candidate, Instance};
use phasesync_harness::sweep::plot_from_file;
use phasesync_harness::{run_sweep, Estimator, ExperimentConfig, HarnessError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "phasesync", version, about = "Phase synchronization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a model instance and write it to a file.
    Gen(GenArgs),
    /// Run one estimator on an instance and print a JSON report.
    Solve(SolveArgs),
    /// Print the optimality certificate for a candidate on an instance.
    Certify(CertifyArgs),
    /// Run a Monte-Carlo sweep from a TOML or JSON config.
    Sweep(SweepArgs),
    /// Render SVG plots from a records.csv.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Absolute noise level.
    #[arg(long, conflicts_with = "multiplier")]
    sigma: Option<f64>,
    /// Noise level as a multiple of sqrt(n / ln n).
    #[arg(long)]
    multiplier: Option<f64>,
    #[arg(long, default_value = "complex-gaussian")]
    kind: NoiseKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "gpm", value_parser = parse_estimator)]
    estimator: Estimator,
    /// Write the estimate as a candidate file.
    #[arg(long)]
    candidate_out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    instance: PathBuf,
    candidate: PathBuf,
    /// Defaults to 1e-8 times the spectral norm of C.
    #[arg(long)]
    psd_tol: Option<f64>,
    /// Defaults to 1e-7 sqrt(n).
    #[arg(long)]
    kernel_tol: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// Override `output_dir` from the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override `workers` from the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    records: PathBuf,
    /// Defaults to the directory holding the records.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_estimator(s: &str) -> std::result::Result<Estimator, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v)
        .map_err(|e| HarnessError::Validation(format!("report not serializable: {e}")))?;
    println!("{text}");
    Ok(())
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    let sigma = match (a.sigma, a.multiplier) {
        (Some(s), None) => s,
        (None, Some(m)) => m * regime_scale(a.n),
        _ => return Err(HarnessError::Validation("give exactly one of --sigma or --multiplier".into())),
    };
    let model = MeasurementModel::sample(a.n, sigma, a.kind, a.seed)?;
    Instance::from_model(&model, a.seed).write(&a.out)?;
    Ok(ExitCode::SUCCESS)
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let inst = Instance::read(&a.instance)?;
    let n = inst.n();
    let eig = EigOptions::for_dim(n).with_seed(inst.seed);
    let pair = leading_eigpair_with(&inst.c, &eig)?;
    let (x, iterations, converged, residual) = match a.estimator {
        Estimator::Gpm => {
            let cfg = GpmConfig {
                capture_trace: false,
                ..GpmConfig::for_dim(n)
            };
            let t = run_gpm(&inst.c, &pair.vector, &cfg, inst.signal.as_ref(), None)?;
            let it = t.iterations();
            (t.estimate, it, t.converged, Some(t.fixed_point_residual))
        }
        Estimator::Eig => (pair.vector.clone(), pair.iterations, true, None),
        Estimator::ProjectedEig => (phase_project(&pair.vector), pair.iterations, true, None),
    };
    let objective = inst.c.quadratic_form(&x, &x)?.re;
    let (l2, linf) = match &inst.signal {
        Some(z) => (Some(d2(&x, z.vector())?), Some(aligned_linf(&x, z.vector())?)),
        None => (None, None),
    };
    if let Some(path) = &a.candidate_out {
        write_candidate(&x, path)?;
    }
    print_json(&json!({
        "estimator": a.estimator,
        "n": n,
        "iterations": iterations,
        "converged": converged,
        "objective": objective,
        "fixed_point_residual": residual,
        "l2_err": l2,
        "linf_err": linf,
    }))?;
    Ok(if converged { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn certify(a: CertifyArgs) -> Result<ExitCode> {
    let inst = Instance::read(&a.instance)?;
    let x = read_candidate(&a.candidate)?;
    let norm = spectral_norm(&inst.c, 1e-6)?;
    let mut tol = CertificateTolerances::for_norm(norm, inst.n());
    if let Some(t) = a.psd_tol {
        tol.psd_tol = t;
    }
    if let Some(t) = a.kernel_tol {
        tol.kernel_tol = t;
    }
    let report = verify_optimality(&inst.c, &x, &tol)?;
    print_json(&json!({ "tolerances": tol, "report": report }))?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(a: SweepArgs) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(dir) = a.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let out = run_sweep(&cfg)?;
    eprintln!(
        "{} records -> {}; summary -> {}",
        out.records.len(),
        out.records_path.display(),
        out.summary_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn plot(a: PlotArgs) -> Result<ExitCode> {
    let dir = a
        .out_dir
        .unwrap_or_else(|| a.records.parent().unwrap_or(Path::new(".")).to_path_buf());
    for p in plot_from_file(&a.records, &dir)? {
        println!("{}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Certify(a) => certify(a),
        Command::Sweep(a) => sweep(a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
