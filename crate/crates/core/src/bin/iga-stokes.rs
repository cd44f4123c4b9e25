//! Batch runner for Stokes preconditioner experiments.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;

use iga_stokes::discretization::{Family, Transform};
use iga_stokes::experiment::{emit_table, run_experiment, ExperimentConfig, GeometryKind, StopSpec, TableFormat};
use iga_stokes::solvers::VelocityStrategy;

/// Runs MINRES on isogeometric Stokes discretizations over a grid of spline
/// degrees and refinement levels and writes iteration counts and errors.
#[derive(Debug, Parser)]
#[command(name = "iga-stokes", version)]
struct Args {
    /// Domain: square or annulus.
    #[arg(long, default_value = "square")]
    geometry: GeometryKind,
    /// Space families (TH, NE, RT), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "TH")]
    family: Vec<Family>,
    /// Velocity pull-back: direct or piola.
    #[arg(long, default_value = "direct")]
    transform: Transform,
    /// Degree parameters p, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    degrees: Vec<usize>,
    /// Refinement levels ℓ (2^ℓ elements per direction), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    levels: Vec<usize>,
    /// Velocity preconditioner: scms_mg, scms_mg_geo, gs_mg, exact_fastdiag, exact_direct.
    #[arg(long, default_value = "scms_mg")]
    precond: VelocityStrategy,
    /// Pressure scaling β (default depends on preconditioner and family).
    #[arg(long)]
    beta: Option<f64>,
    /// Smoother damping scale c in σ⁻¹ = c·ĥ² (default 0.04, or 0.16 for RT).
    #[arg(long)]
    damping_scale: Option<f64>,
    /// Stopping rule: error[:tol] (against a direct reference) or residual[:tol].
    #[arg(long, default_value = "error:1e-6")]
    stop: StopSpec,
    /// Iteration cap.
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Largest system (unknowns) whose error-stopping reference is computed
    /// by sparse LU; larger ones iterate for it.
    #[arg(long, default_value_t = 40_000)]
    reference_budget: usize,
    /// Largest system attempted; bigger cells are reported as OoM.
    #[arg(long, default_value_t = 400_000)]
    max_dofs: usize,
    /// Output format: csv or markdown.
    #[arg(long, default_value = "markdown")]
    format: TableFormat,
    /// Output file (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave the seconds column empty for reproducible output.
    #[arg(long)]
    omit_timing: bool,
}

fn run(args: Args) -> iga_stokes::Result<()> {
    let config = ExperimentConfig {
        geometry: args.geometry,
        families: args.family,
        transform: args.transform,
        degrees: args.degrees,
        levels: args.levels,
        precond: args.precond,
        beta: args.beta,
        damping_scale: args.damping_scale,
        stop: args.stop,
        max_iters: args.max_iters,
        reference_budget: args.reference_budget,
        max_dofs: args.max_dofs,
    };
    let reports = run_experiment(&config)?;
    let writer: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    emit_table(&reports, args.format, !args.omit_timing, writer)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
