//! The three cell layouts and the sweep driver.
//!
//! The AP sits at the origin and the station under test (SUT) at `(d_s, 0)`.
//! `VISIBLE` adds an interfering station (INT) right next to the AP at
//! `(0, 2)`, `HIDDEN` puts it on the opposite side at `(-40, 2)`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::mac::MacParams;
use crate::metrics::{summarize, MetricsSummary};
use crate::minstrel::MinstrelParams;
use crate::network::{BeaconParams, SimOutput, SimSetup, Simulation};
use crate::phy::{max_range, ErrorModel, NodeId, PathLossParams, Position, RadioParams};
use crate::sim::SimTime;
use crate::traffic::{BurstyProfile, PeriodicProfile, TrafficProfile};

pub const AP: NodeId = 0;
pub const SUT: NodeId = 1;
pub const INT: NodeId = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConfigName {
    #[serde(rename = "NO_INT")]
    NoInt,
    #[serde(rename = "VISIBLE")]
    Visible,
    #[serde(rename = "HIDDEN")]
    Hidden,
}

impl ConfigName {
    pub const ALL: [ConfigName; 3] = [ConfigName::NoInt, ConfigName::Visible, ConfigName::Hidden];

    pub fn as_str(self) -> &'static str {
        match self {
            ConfigName::NoInt => "NO_INT",
            ConfigName::Visible => "VISIBLE",
            ConfigName::Hidden => "HIDDEN",
        }
    }

    pub fn has_interferer(self) -> bool {
        self != ConfigName::NoInt
    }
}

impl std::fmt::Display for ConfigName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConfigName {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "NO_INT" => Ok(ConfigName::NoInt),
            "VISIBLE" => Ok(ConfigName::Visible),
            "HIDDEN" => Ok(ConfigName::Hidden),
            _ => Err(SimError::InvalidScenario(format!(
                "unknown configuration '{s}' (expected NO_INT, VISIBLE or HIDDEN)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NodeRole {
    Ap,
    Sut,
    Int,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub role: NodeRole,
    pub position: Position,
    pub radio: RadioParams,
    pub mac: MacParams,
    pub traffic: Option<TrafficProfile>,
}

/// One simulation point. Every parameter has the reference default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: ConfigName,
    pub d_s: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub app_start_s: f64,
    pub error_model: ErrorModel,
    pub radio: RadioParams,
    pub loss: PathLossParams,
    pub mac: MacParams,
    pub minstrel: MinstrelParams,
    pub sut_traffic: PeriodicProfile,
    pub int_traffic: BurstyProfile,
    pub beacon: Option<BeaconParams>,
    pub visible_int_x: f64,
    pub hidden_int_x: f64,
    pub int_offset_m: f64,
}

impl ScenarioConfig {
    pub fn new(name: ConfigName, d_s: f64) -> Self {
        ScenarioConfig {
            name,
            d_s,
            duration_s: 30_000.0,
            seed: 1,
            app_start_s: 1.0,
            error_model: ErrorModel::default(),
            radio: RadioParams::default(),
            loss: PathLossParams::default(),
            mac: MacParams::default(),
            minstrel: MinstrelParams::default(),
            sut_traffic: PeriodicProfile::default(),
            int_traffic: BurstyProfile::default(),
            beacon: Some(BeaconParams::default()),
            visible_int_x: 0.0,
            hidden_int_x: -40.0,
            int_offset_m: 2.0,
        }
    }

    pub fn with_duration(mut self, seconds: f64) -> Self {
        self.duration_s = seconds;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn at(&self, d_s: f64) -> Self {
        ScenarioConfig { d_s, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_s > 0.0 && self.d_s.is_finite()) {
            return Err(SimError::InvalidScenario(format!(
                "d_s must be positive, got {}",
                self.d_s
            )));
        }
        if !(self.app_start_s >= 0.0) || !(self.duration_s > self.app_start_s) {
            return Err(SimError::InvalidScenario(format!(
                "duration_s ({}) must exceed app_start_s ({})",
                self.duration_s, self.app_start_s
            )));
        }
        self.radio.validate()?;
        self.loss.validate()?;
        self.mac.validate()?;
        self.minstrel.validate()?;
        TrafficProfile::Periodic(self.sut_traffic.clone()).validate()?;
        TrafficProfile::Bursty(self.int_traffic.clone()).validate()?;
        Ok(())
    }

    pub fn sut_position(&self) -> Position {
        Position::new(self.d_s, 0.0)
    }

    pub fn int_position(&self) -> Option<Position> {
        match self.name {
            ConfigName::NoInt => None,
            ConfigName::Visible => Some(Position::new(self.visible_int_x, self.int_offset_m)),
            ConfigName::Hidden => Some(Position::new(self.hidden_int_x, self.int_offset_m)),
        }
    }

    /// Whether SUT and INT can hear each other's preambles. `None` without
    /// an interferer.
    pub fn sut_int_visible(&self) -> Option<bool> {
        let d = self.int_position()?.distance_to(&self.sut_position());
        Some(d <= max_range(&self.radio, &self.loss))
    }

    /// Smallest `d_s` at which the HIDDEN interferer drops out of the SUT's
    /// detection range.
    pub fn hidden_onset_m(&self) -> f64 {
        let r = max_range(&self.radio, &self.loss);
        let dy = self.int_offset_m;
        (r * r - dy * dy).max(0.0).sqrt() + self.hidden_int_x
    }

    pub fn nodes(&self) -> Vec<NodeSpec> {
        let node = |role, position, traffic| NodeSpec {
            role,
            position,
            radio: self.radio,
            mac: self.mac.clone(),
            traffic,
        };
        let mut nodes = vec![
            node(NodeRole::Ap, Position::ORIGIN, None),
            node(
                NodeRole::Sut,
                self.sut_position(),
                Some(TrafficProfile::Periodic(self.sut_traffic.clone())),
            ),
        ];
        if let Some(p) = self.int_position() {
            nodes.push(node(
                NodeRole::Int,
                p,
                Some(TrafficProfile::Bursty(self.int_traffic.clone())),
            ));
        }
        nodes
    }

    pub fn setup(&self, record_trace: bool) -> Result<SimSetup> {
        self.validate()?;
        Ok(SimSetup {
            nodes: self.nodes(),
            loss: self.loss,
            error_model: self.error_model.clone(),
            minstrel: self.minstrel.clone(),
            beacon: self.beacon,
            seed: self.seed,
            app_start: SimTime::from_secs_f64(self.app_start_s),
            duration: SimTime::from_secs_f64(self.duration_s),
            observed: SUT,
            record_trace,
        })
    }

    pub fn build(&self) -> Result<Simulation> {
        Simulation::new(self.setup(false)?)
    }

    /// Runs the point and summarizes the SUT's packet log.
    pub fn run(&self) -> Result<RunResult> {
        let output = self.build()?.run();
        let summary = summarize(
            &output.packets,
            output.duration.as_secs_f64(),
            output.observed_tx_power_mw,
        )?;
        Ok(RunResult { output, summary })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub output: SimOutput,
    pub summary: MetricsSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub d_s: f64,
    pub seed: u64,
    pub summary: std::result::Result<MetricsSummary, String>,
    pub runtime_s: f64,
}

/// Runs one independent simulation per `(position, seed)` on `threads`
/// worker threads. Results come back ordered by position, then seed.
pub fn sweep(template: &ScenarioConfig, positions: &[f64], seeds: &[u64], threads: usize) -> Result<Vec<SweepPoint>> {
    if positions.is_empty() || seeds.is_empty() {
        return Err(SimError::InvalidScenario(
            "sweep needs at least one position and one seed".into(),
        ));
    }
    let points: Vec<(f64, u64)> = positions
        .iter()
        .flat_map(|&d| seeds.iter().map(move |&s| (d, s)))
        .collect();
    let run_point = |&(d_s, seed): &(f64, u64)| {
        let started = Instant::now();
        let summary = template
            .at(d_s)
            .with_seed(seed)
            .run()
            .map(|r| r.summary)
            .map_err(|e| e.to_string());
        SweepPoint {
            d_s,
            seed,
            summary,
            runtime_s: started.elapsed().as_secs_f64(),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| SimError::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(run_point).collect()))
}
