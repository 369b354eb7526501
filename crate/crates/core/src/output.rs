//! CSV results and the JSON run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunSpec;
use crate::error::Result;
use crate::metrics::MetricsSummary;
use crate::phy::RateId;
use crate::scenario::{sweep, ScenarioConfig, SweepPoint};

pub const CSV_FIXED_COLUMNS: [&str; 13] = [
    "config",
    "name",
    "d_s_m",
    "seed",
    "plr",
    "mu_d_us",
    "sigma_d_us",
    "d_min_us",
    "p99_us",
    "p999_us",
    "mu_a",
    "mu_r_mbps",
    "mu_p_uw",
];

pub fn csv_header() -> Vec<String> {
    let mut cols: Vec<String> = CSV_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend(RateId::ALL.iter().map(|r| format!("f_{}", r.mbps())));
    cols.extend(RateId::ALL.iter().map(|r| format!("s_{}", r.mbps())));
    cols
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn csv_row(config: &ScenarioConfig, name: &str, d_s: f64, seed: u64, s: &MetricsSummary) -> Vec<String> {
    let mut row = vec![
        config.name.to_string(),
        name.to_string(),
        d_s.to_string(),
        seed.to_string(),
        s.plr.to_string(),
        opt(s.mu_d_us),
        opt(s.sigma_d_us),
        opt(s.d_min_us),
        opt(s.p99_us),
        opt(s.p999_us),
        opt(s.mu_a),
        opt(s.mu_r_mbps),
        s.mu_p_uw().to_string(),
    ];
    row.extend(s.f_r.iter().map(|f| f.to_string()));
    row.extend(s.s_r().iter().map(|p| opt(*p)));
    row
}

/// Writes one row per successful point.
pub fn write_csv<W: Write>(out: W, spec: &RunSpec, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for p in points {
        if let Ok(s) = &p.summary {
            w.write_record(csv_row(&spec.template, &spec.name, p.d_s, p.seed, s))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub d_s_m: f64,
    pub seed: u64,
    pub runtime_s: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub name: String,
    pub csv: String,
    pub config: ScenarioConfig,
    pub positions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub points: Vec<PointRecord>,
}

/// Everything needed to regenerate the CSVs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub parallelism: usize,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv_paths: Vec<PathBuf>,
    pub manifest_path: PathBuf,
    pub failures: Vec<(String, f64, u64, String)>,
}

impl RunReport {
    pub fn all_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Runs every sweep, writing `<name>.csv` per run and `manifest.json` into
/// `out_dir`.
pub fn run(specs: &[RunSpec], parallelism: usize, out_dir: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let started = unix_now();
    let mut runs = Vec::new();
    let mut csv_paths = Vec::new();
    let mut failures = Vec::new();
    for spec in specs {
        let points = sweep(&spec.template, &spec.positions, &spec.seeds, parallelism)?;
        let csv_name = format!("{}.csv", spec.name);
        let path = out_dir.join(&csv_name);
        write_csv(std::fs::File::create(&path)?, spec, &points)?;
        csv_paths.push(path);
        for p in &points {
            if let Err(e) = &p.summary {
                failures.push((spec.name.clone(), p.d_s, p.seed, e.clone()));
            }
        }
        runs.push(RunRecord {
            name: spec.name.clone(),
            csv: csv_name,
            config: spec.template.clone(),
            positions: spec.positions.clone(),
            seeds: spec.seeds.clone(),
            points: points
                .iter()
                .map(|p| PointRecord {
                    d_s_m: p.d_s,
                    seed: p.seed,
                    runtime_s: p.runtime_s,
                    error: p.summary.as_ref().err().cloned(),
                })
                .collect(),
        });
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        parallelism,
        started_unix_s: started,
        finished_unix_s: unix_now(),
        runs,
    };
    let manifest_path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    std::fs::write(&manifest_path, json)?;
    Ok(RunReport {
        csv_paths,
        manifest_path,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_schema() {
        let h = csv_header().join(",");
        assert_eq!(
            h,
            "config,name,d_s_m,seed,plr,mu_d_us,sigma_d_us,d_min_us,p99_us,p999_us,mu_a,mu_r_mbps,mu_p_uw,\
             f_6,f_9,f_12,f_18,f_24,f_36,f_48,f_54,s_6,s_9,s_12,s_18,s_24,s_36,s_48,s_54"
        );
    }
}
