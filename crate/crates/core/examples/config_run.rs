//! Parses a TOML run file and writes CSVs plus a manifest, like the CLI.
//!
//! ```text
//! cargo run --release --example config_run -- crates/core/examples/runs.toml /tmp/dcf-out
//! ```

use std::path::PathBuf;

use dcf_sim::config::parse_config;
use dcf_sim::output::run;

fn main() -> dcf_sim::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/runs.toml")));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("dcf-sim-example"));
    let specs = parse_config(&config)?;
    for s in &specs {
        println!(
            "{}: {} x {} points of {}",
            s.name,
            s.positions.len(),
            s.seeds.len(),
            s.template.name
        );
    }
    let report = run(&specs, 1, &out)?;
    for p in report.csv_paths.iter().chain([&report.manifest_path]) {
        println!("wrote {}", p.display());
    }
    Ok(())
}
