//! TOML run files.
//!
//! A file holds one or more `[[run]]` tables. Only `config` is required;
//! every other key overrides one default.
//!
//! ```toml
//! [[run]]
//! config = "HIDDEN"
//! positions = [1, 5, 10, 15, 20]
//! seeds = [1, 2]
//! duration_s = 2000
//! error_model = "analytic"
//! retry_limit = 13
//! ```

use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Result, SimError};
use crate::phy::{ErrorModel, ErrorModelChoice, RateId};
use crate::scenario::{ConfigName, ScenarioConfig};

/// Sweep over positions and seeds of one scenario template.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub name: String,
    pub template: ScenarioConfig,
    pub positions: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl RunSpec {
    /// The standard sweep: `d_s` from 1 to 50 m in 1 m steps, seed 1.
    pub fn full_sweep(name: ConfigName) -> Self {
        RunSpec {
            name: name.as_str().to_ascii_lowercase(),
            template: ScenarioConfig::new(name, 1.0),
            positions: (1..=50).map(f64::from).collect(),
            seeds: vec![1],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    run: Vec<Spanned<RawRun>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    config: Spanned<String>,
    name: Option<String>,
    positions: Option<Spanned<Vec<f64>>>,
    seeds: Option<Vec<u64>>,
    duration_s: Option<Spanned<f64>>,
    app_start_s: Option<f64>,
    error_model: Option<Spanned<String>>,
    snr_thresholds_db: Option<[f64; 8]>,
    analytic_snr_gain_db: Option<f64>,

    tx_power_dbm: Option<f64>,
    preamble_detect_dbm: Option<f64>,
    noise_figure_db: Option<f64>,
    bandwidth_hz: Option<f64>,
    energy_detect_dbm: Option<f64>,
    prop_speed_mps: Option<f64>,
    ref_loss_db: Option<f64>,
    ref_distance_m: Option<f64>,
    path_loss_exponent: Option<f64>,

    sifs_us: Option<u64>,
    slot_us: Option<u64>,
    difs_us: Option<u64>,
    cw_min: Option<u32>,
    cw_max: Option<u32>,
    retry_limit: Option<u32>,
    ack_timeout_us: Option<u64>,
    basic_rates_mbps: Option<Vec<u32>>,
    queue_limit: Option<usize>,

    ewma_weight: Option<f64>,
    update_interval_ms: Option<u64>,
    probe_probability: Option<f64>,

    period_s: Option<f64>,
    sut_payload_bytes: Option<u32>,
    int_payload_bytes: Option<u32>,
    idle_mean_s: Option<f64>,
    idle_cap_s: Option<f64>,
    burst_mean: Option<f64>,
    burst_cap: Option<u32>,
    spacing_s: Option<f64>,

    beacons: Option<bool>,
    beacon_interval_us: Option<u64>,
    beacon_bytes: Option<u32>,

    hidden_int_x_m: Option<f64>,
    visible_int_x_m: Option<f64>,
    int_offset_m: Option<f64>,
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

/// Reads and validates a run file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<Vec<RunSpec>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SimError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text, &path.display().to_string())
}

/// Parses run-file text. `origin` names the source in error messages.
pub fn parse_config_str(text: &str, origin: &str) -> Result<Vec<RunSpec>> {
    let err = |message: String| SimError::Config {
        path: origin.to_string(),
        message,
    };
    let raw: RawFile = toml::from_str(text).map_err(|e| err(e.to_string().trim_end().to_string()))?;
    if raw.run.is_empty() {
        return Err(err("no [[run]] tables found".into()));
    }
    raw.run
        .into_iter()
        .map(|run| {
            let line = line_of(text, run.span());
            build_run(run.into_inner(), text).map_err(|(l, m)| err(format!("line {}: {m}", l.unwrap_or(line))))
        })
        .collect()
}

type BuildError = (Option<usize>, String);

fn build_run(raw: RawRun, text: &str) -> std::result::Result<RunSpec, BuildError> {
    let at = |span: Range<usize>| Some(line_of(text, span));
    let name: ConfigName = raw
        .config
        .get_ref()
        .parse()
        .map_err(|e: SimError| (at(raw.config.span()), e.to_string()))?;
    let mut c = ScenarioConfig::new(name, 1.0);

    let positions = match raw.positions {
        Some(p) => {
            let line = at(p.span());
            let v = p.into_inner();
            if v.is_empty() {
                return Err((line, "positions must not be empty".into()));
            }
            if let Some(bad) = v.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
                return Err((line, format!("position {bad} m rejected: d_s must be positive")));
            }
            v
        }
        None => (1..=50).map(f64::from).collect(),
    };
    let seeds = raw.seeds.unwrap_or_else(|| vec![1]);
    if seeds.is_empty() {
        return Err((None, "seeds must not be empty".into()));
    }
    if let Some(d) = raw.duration_s {
        let line = at(d.span());
        c.duration_s = d.into_inner();
        if !(c.duration_s > 0.0) {
            return Err((line, "duration_s must be positive".into()));
        }
    }
    if let Some(v) = raw.app_start_s {
        c.app_start_s = v;
    }
    if let Some(m) = raw.error_model {
        let choice: ErrorModelChoice = m.get_ref().parse().map_err(|e: String| (at(m.span()), e))?;
        c.error_model = ErrorModel::new(choice);
    }
    if let Some(v) = raw.snr_thresholds_db {
        c.error_model.snr_thresholds_db = v;
    }
    if let Some(v) = raw.analytic_snr_gain_db {
        c.error_model.analytic_snr_gain_db = v;
    }

    macro_rules! set {
        ($($field:ident => $target:expr),* $(,)?) => {
            $(if let Some(v) = raw.$field { $target = v; })*
        };
    }
    set! {
        tx_power_dbm => c.radio.tx_power_dbm,
        preamble_detect_dbm => c.radio.preamble_detect_dbm,
        noise_figure_db => c.radio.noise_figure_db,
        bandwidth_hz => c.radio.bandwidth_hz,
        energy_detect_dbm => c.radio.energy_detect_dbm,
        prop_speed_mps => c.radio.prop_speed_mps,
        ref_loss_db => c.loss.ref_loss_db,
        ref_distance_m => c.loss.ref_distance_m,
        path_loss_exponent => c.loss.exponent,
        sifs_us => c.mac.sifs_us,
        slot_us => c.mac.slot_us,
        difs_us => c.mac.difs_us,
        cw_min => c.mac.cw_min,
        cw_max => c.mac.cw_max,
        retry_limit => c.mac.retry_limit,
        ack_timeout_us => c.mac.ack_timeout_us,
        queue_limit => c.mac.queue_limit,
        ewma_weight => c.minstrel.ewma_weight,
        update_interval_ms => c.minstrel.update_interval_ms,
        probe_probability => c.minstrel.probe_probability,
        period_s => c.sut_traffic.period_s,
        sut_payload_bytes => c.sut_traffic.payload_bytes,
        int_payload_bytes => c.int_traffic.payload_bytes,
        idle_mean_s => c.int_traffic.idle_mean_s,
        idle_cap_s => c.int_traffic.idle_cap_s,
        burst_mean => c.int_traffic.burst_mean,
        burst_cap => c.int_traffic.burst_cap,
        spacing_s => c.int_traffic.spacing_s,
        hidden_int_x_m => c.hidden_int_x,
        visible_int_x_m => c.visible_int_x,
        int_offset_m => c.int_offset_m,
    }
    if let Some(rates) = raw.basic_rates_mbps {
        c.mac.basic_rates = rates
            .iter()
            .map(|&m| RateId::from_mbps(m).ok_or_else(|| (None, format!("{m} Mb/s is not an 802.11a rate"))))
            .collect::<std::result::Result<_, _>>()?;
    }
    if raw.beacons == Some(false) {
        c.beacon = None;
    } else if let Some(b) = c.beacon.as_mut() {
        if let Some(v) = raw.beacon_interval_us {
            b.interval_us = v;
        }
        if let Some(v) = raw.beacon_bytes {
            b.psdu_bytes = v;
        }
    }

    let template = c.at(positions[0]);
    template.validate().map_err(|e| (None, e.to_string()))?;
    Ok(RunSpec {
        name: raw.name.unwrap_or_else(|| name.as_str().to_ascii_lowercase()),
        template,
        positions,
        seeds,
    })
}

/// Parses a position list such as `1,5,10`, `20..50` or `1..50:7`
/// (ranges are inclusive, default step 1 m).
pub fn parse_positions(text: &str) -> Result<Vec<f64>> {
    let bad = |m: String| SimError::InvalidParameter(format!("positions '{text}': {m}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("'{s}': {e}")));
    let mut out = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (num(hi)?, num(step)?),
                None => (num(rest)?, 1.0),
            };
            let lo = num(lo)?;
            if !(step > 0.0) || hi < lo {
                return Err(bad(format!("empty range '{item}'")));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            out.extend((0..=n).map(|k| lo + k as f64 * step));
        } else {
            out.push(num(item)?);
        }
    }
    if out.is_empty() {
        return Err(bad("no positions".into()));
    }
    if let Some(d) = out.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(bad(format!("{d} m rejected, d_s must be positive")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let runs = parse_config_str("[[run]]\nconfig = \"NO_INT\"\n", "t").unwrap();
        assert_eq!(runs.len(), 1);
        let r = &runs[0];
        assert_eq!(r.name, "no_int");
        assert_eq!(r.positions.len(), 50);
        assert_eq!(r.seeds, vec![1]);
        let c = &r.template;
        assert_eq!(c.duration_s, 30_000.0);
        assert_eq!(c.radio.tx_power_dbm, 16.0206);
        assert_eq!(c.radio.preamble_detect_dbm, -82.0);
        assert_eq!(c.loss.ref_loss_db, 46.6777);
        assert_eq!(c.mac.retry_limit, 13);
        assert_eq!(c.sut_traffic.period_s, 0.5);
    }

    #[test]
    fn overrides_apply() {
        let text = r#"
[[run]]
config = "hidden"
name = "h"
positions = [12, 20]
seeds = [3, 4]
duration_s = 100
error_model = "analytic"
retry_limit = 7
tx_power_dbm = 20.0
beacons = false
"#;
        let r = &parse_config_str(text, "t").unwrap()[0];
        assert_eq!(r.template.name, ConfigName::Hidden);
        assert_eq!(r.positions, vec![12.0, 20.0]);
        assert_eq!(r.seeds, vec![3, 4]);
        assert_eq!(r.template.error_model.choice, ErrorModelChoice::Analytic);
        assert_eq!(r.template.mac.retry_limit, 7);
        assert_eq!(r.template.radio.tx_power_dbm, 20.0);
        assert!(r.template.beacon.is_none());
    }

    #[test]
    fn zero_distance_rejected_with_line() {
        let text = "[[run]]\nconfig = \"NO_INT\"\n\npositions = [0, 1]\n";
        let e = parse_config_str(text, "t").unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
        assert!(e.contains("d_s"), "{e}");
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = "[[run]]\nconfig = \"NO_INT\"\nbogus_key = 3\n";
        let e = parse_config_str(text, "t").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        assert!(e.contains("bogus_key"), "{e}");
    }

    #[test]
    fn malformed_and_missing() {
        let e = parse_config_str("[[run]\nconfig = 1", "t").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        let e = parse_config_str("[[run]]\nduration_s = 5\n", "t")
            .unwrap_err()
            .to_string();
        assert!(e.contains("config"), "{e}");
        assert!(parse_config_str("", "t").is_err());
        let e = parse_config_str("[[run]]\nconfig = \"NOPE\"\n", "t")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn position_lists() {
        assert_eq!(parse_positions("1,5,10").unwrap(), vec![1.0, 5.0, 10.0]);
        assert_eq!(parse_positions("20..23").unwrap(), vec![20.0, 21.0, 22.0, 23.0]);
        assert_eq!(parse_positions("1..10:4,50").unwrap(), vec![1.0, 5.0, 9.0, 50.0]);
        assert!(parse_positions("0,1").is_err());
        assert!(parse_positions("5..1").is_err());
        assert!(parse_positions("").is_err());
    }

    #[test]
    fn out_of_range_values() {
        let e = parse_config_str("[[run]]\nconfig = \"NO_INT\"\nduration_s = -1\n", "t").unwrap_err();
        assert!(e.to_string().contains("line 3"));
        assert!(parse_config_str("[[run]]\nconfig = \"NO_INT\"\nbasic_rates_mbps = [7]\n", "t").is_err());
        assert!(parse_config_str("[[run]]\nconfig = \"NO_INT\"\ncw_min = 2000\n", "t").is_err());
    }
}
