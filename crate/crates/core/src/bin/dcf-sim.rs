//! Command-line sweep runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dcf_sim::config::{parse_config, parse_positions, RunSpec};
use dcf_sim::output::run;
use dcf_sim::phy::{ErrorModel, ErrorModelChoice};
use dcf_sim::scenario::ConfigName;

/// Simulate an 802.11a cell over a sweep of station positions and write one
/// CSV per configuration plus a JSON manifest.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// TOML run file. Without one, the three standard configurations are run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Replace every run's seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated seconds per point.
    #[arg(long)]
    duration_s: Option<f64>,
    /// Positions in metres, e.g. `1,5,10` or `1..50` or `20..50:2`.
    #[arg(long)]
    positions: Option<String>,
    /// Worker threads (defaults to the available cores).
    #[arg(long)]
    parallel: Option<usize>,
    #[arg(long, value_parser = ["threshold", "analytic"])]
    error_model: Option<String>,
}

fn apply(args: &Args, specs: &mut [RunSpec]) -> dcf_sim::Result<()> {
    let positions = args.positions.as_deref().map(parse_positions).transpose()?;
    for spec in specs {
        if let Some(seed) = args.seed {
            spec.seeds = vec![seed];
        }
        if let Some(d) = args.duration_s {
            spec.template.duration_s = d;
        }
        if let Some(p) = &positions {
            spec.positions = p.clone();
        }
        if let Some(m) = &args.error_model {
            let choice: ErrorModelChoice = m.parse().map_err(dcf_sim::SimError::InvalidParameter)?;
            spec.template.error_model = ErrorModel {
                choice,
                ..spec.template.error_model.clone()
            };
        }
        spec.template.validate()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut specs = match &args.config {
        Some(path) => match parse_config(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ConfigName::ALL.into_iter().map(RunSpec::full_sweep).collect(),
    };
    if let Err(e) = apply(&args, &mut specs) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let threads = args
        .parallel
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match run(&specs, threads, &args.out) {
        Ok(report) => {
            for p in &report.csv_paths {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", report.manifest_path.display());
            for (name, d, seed, e) in &report.failures {
                eprintln!("point failed: {name} d_s={d} seed={seed}: {e}");
            }
            if report.all_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
