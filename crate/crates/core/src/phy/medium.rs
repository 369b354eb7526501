//! Shared wireless medium: who hears what, when, and whether a locked
//! reception survives the interference it saw.

use serde::{Deserialize, Serialize};

use super::error_model::ErrorModel;
use super::geometry::Position;
use super::propagation::{dbm_to_mw, noise_floor_dbm, path_loss_db, propagation_delay, PathLossParams, RadioParams};
use super::rates::RateId;
use crate::error::{Result, SimError};
use crate::sim::{RngStream, SimTime};

pub type NodeId = usize;
pub type FrameId = u64;

/// Smallest legal MAC frame (an ACK).
pub const MIN_PSDU_BYTES: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    Data,
    Ack,
    Beacon,
}

/// A MAC frame handed to the PHY. `dest == None` is broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Psdu {
    pub size: u32,
    pub source: NodeId,
    pub dest: Option<NodeId>,
    pub kind: FrameKind,
}

impl Psdu {
    pub fn new(size: u32, source: NodeId, dest: Option<NodeId>, kind: FrameKind) -> Result<Self> {
        if size < MIN_PSDU_BYTES {
            return Err(SimError::InvalidParameter(format!(
                "PSDU of {size} B is shorter than the minimal {MIN_PSDU_BYTES} B frame"
            )));
        }
        Ok(Psdu {
            size,
            source,
            dest,
            kind,
        })
    }
}

/// One transmission on the air.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirFrame {
    pub id: FrameId,
    pub psdu: Psdu,
    pub rate: RateId,
    pub tx_start: SimTime,
    pub airtime: SimTime,
}

impl AirFrame {
    pub fn tx_end(&self) -> SimTime {
        self.tx_start + self.airtime
    }
}

/// A frame as seen at one receiver: its arrival window and received power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InFlight {
    pub frame: AirFrame,
    pub start: SimTime,
    pub end: SimTime,
    pub power_mw: f64,
}

/// Where and when a transmission lands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub rx: NodeId,
    pub start: SimTime,
    pub end: SimTime,
}

/// Outcome of a locked reception at its end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reception {
    pub frame: AirFrame,
    pub success: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelState {
    Idle,
    Busy,
}

/// Decides whether a frame survives the interference that overlapped it.
///
/// The frame's arrival window is cut into chunks at every interferer start
/// and end. In each chunk SINR is signal over noise plus the sum of the
/// interferers present; the chunk carries its share of the frame's bits and
/// succeeds with probability `1 - PER(SINR)`. The frame survives only if every
/// chunk does. Chunks whose success probability is exactly 0 or 1 consume no
/// randomness.
pub fn reception_outcome(
    frame: &InFlight,
    overlaps: &[InFlight],
    noise_mw: f64,
    model: &ErrorModel,
    rng: &mut RngStream,
) -> bool {
    let total = (frame.end - frame.start).as_nanos();
    if total == 0 {
        return true;
    }
    let mut cuts: Vec<SimTime> = vec![frame.start, frame.end];
    for o in overlaps {
        for t in [o.start, o.end] {
            if t > frame.start && t < frame.end {
                cuts.push(t);
            }
        }
    }
    cuts.sort();
    cuts.dedup();

    let bits = 8.0 * f64::from(frame.frame.psdu.size);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let interference: f64 = overlaps
            .iter()
            .filter(|o| o.start < b && o.end > a)
            .map(|o| o.power_mw)
            .sum();
        let sinr_db = 10.0 * (frame.power_mw / (noise_mw + interference)).log10();
        let share = (b - a).as_nanos() as f64 / total as f64;
        let p = model.chunk_success(sinr_db, frame.frame.rate, bits * share);
        if p <= 0.0 {
            return false;
        }
        if p < 1.0 && !rng.bernoulli(p) {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Default)]
struct Lock {
    frame: Option<InFlight>,
    overlaps: Vec<InFlight>,
}

#[derive(Debug, Clone, Default)]
struct RxState {
    arriving: Vec<InFlight>,
    transmitting: bool,
    lock: Lock,
}

/// Per-simulation channel state. Pairwise powers and delays are fixed at
/// construction since nodes do not move during a run.
#[derive(Debug, Clone)]
pub struct Medium {
    radios: Vec<RadioParams>,
    rx_mw: Vec<Vec<f64>>,
    delay: Vec<Vec<SimTime>>,
    noise_mw: Vec<f64>,
    detect_mw: Vec<f64>,
    ed_mw: Vec<f64>,
    rx: Vec<RxState>,
    model: ErrorModel,
    next_frame: FrameId,
}

impl Medium {
    pub fn new(
        positions: &[Position],
        radios: &[RadioParams],
        loss: &PathLossParams,
        model: ErrorModel,
    ) -> Result<Self> {
        if positions.len() != radios.len() {
            return Err(SimError::InvalidScenario("one radio per position required".into()));
        }
        loss.validate()?;
        let n = positions.len();
        let mut rx_mw = vec![vec![0.0; n]; n];
        let mut delay = vec![vec![SimTime::ZERO; n]; n];
        for i in 0..n {
            radios[i].validate()?;
            if !positions[i].is_finite() {
                return Err(SimError::InvalidScenario(format!("node {i} position not finite")));
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = positions[i].distance_to(&positions[j]);
                if d <= 0.0 {
                    return Err(SimError::InvalidScenario(format!("nodes {i} and {j} are co-located")));
                }
                rx_mw[i][j] = dbm_to_mw(radios[i].tx_power_dbm - path_loss_db(loss, d)?);
                delay[i][j] = propagation_delay(&radios[j], d);
            }
        }
        Ok(Medium {
            noise_mw: radios.iter().map(|r| dbm_to_mw(noise_floor_dbm(r))).collect(),
            detect_mw: radios.iter().map(|r| dbm_to_mw(r.preamble_detect_dbm)).collect(),
            ed_mw: radios.iter().map(|r| dbm_to_mw(r.energy_detect_dbm)).collect(),
            radios: radios.to_vec(),
            rx_mw,
            delay,
            rx: vec![RxState::default(); n],
            model,
            next_frame: 0,
        })
    }

    pub fn node_count(&self) -> usize {
        self.rx.len()
    }

    pub fn radio(&self, node: NodeId) -> &RadioParams {
        &self.radios[node]
    }

    pub fn error_model(&self) -> &ErrorModel {
        &self.model
    }

    pub fn rx_power_mw(&self, tx: NodeId, rx: NodeId) -> f64 {
        self.rx_mw[tx][rx]
    }

    pub fn noise_mw(&self, node: NodeId) -> f64 {
        self.noise_mw[node]
    }

    pub fn delay(&self, tx: NodeId, rx: NodeId) -> SimTime {
        self.delay[tx][rx]
    }

    /// Whether `rx` would detect a lone preamble from `tx`.
    pub fn can_detect(&self, tx: NodeId, rx: NodeId) -> bool {
        tx != rx && self.rx_mw[tx][rx] >= self.detect_mw[rx]
    }

    /// SNR (no interference) of a `tx` -> `rx` link, dB.
    pub fn link_snr_db(&self, tx: NodeId, rx: NodeId) -> f64 {
        10.0 * (self.rx_mw[tx][rx] / self.noise_mw[rx]).log10()
    }

    /// Puts a frame on the air. The transmitter abandons any reception in
    /// progress. Returns the frame and its arrival window at every other node.
    pub fn begin_tx(&mut self, psdu: Psdu, rate: RateId, airtime: SimTime, now: SimTime) -> (AirFrame, Vec<Arrival>) {
        let id = self.next_frame;
        self.next_frame += 1;
        let frame = AirFrame {
            id,
            psdu,
            rate,
            tx_start: now,
            airtime,
        };
        let src = psdu.source;
        let state = &mut self.rx[src];
        state.transmitting = true;
        state.lock = Lock::default();
        let arrivals = (0..self.rx.len())
            .filter(|&j| j != src)
            .map(|j| {
                let start = now + self.delay[src][j];
                Arrival {
                    rx: j,
                    start,
                    end: start + airtime,
                }
            })
            .collect();
        (frame, arrivals)
    }

    pub fn end_tx(&mut self, node: NodeId) {
        self.rx[node].transmitting = false;
    }

    pub fn is_transmitting(&self, node: NodeId) -> bool {
        self.rx[node].transmitting
    }

    /// A frame's leading edge reaches `rx`. Returns true if the receiver
    /// locked onto it.
    pub fn signal_start(&mut self, rx: NodeId, frame: AirFrame, now: SimTime) -> bool {
        let power_mw = self.rx_mw[frame.psdu.source][rx];
        let arrival = InFlight {
            frame,
            start: now,
            end: now + frame.airtime,
            power_mw,
        };
        let detect = self.detect_mw[rx];
        let state = &mut self.rx[rx];
        let locked = if state.transmitting {
            false
        } else if state.lock.frame.is_some() {
            state.lock.overlaps.push(arrival);
            false
        } else if power_mw >= detect {
            state.lock.frame = Some(arrival);
            state.lock.overlaps = state.arriving.clone();
            true
        } else {
            false
        };
        state.arriving.push(arrival);
        locked
    }

    /// A frame's trailing edge leaves `rx`. If it was the locked frame, the
    /// reception is resolved.
    pub fn signal_end(&mut self, rx: NodeId, frame_id: FrameId, rng: &mut RngStream) -> Option<Reception> {
        let noise = self.noise_mw[rx];
        let state = &mut self.rx[rx];
        state.arriving.retain(|a| a.frame.id != frame_id);
        let locked = state.lock.frame?;
        if locked.frame.id != frame_id {
            return None;
        }
        let lock = std::mem::take(&mut state.lock);
        let success = reception_outcome(&locked, &lock.overlaps, noise, &self.model, rng);
        Some(Reception {
            frame: locked.frame,
            success,
        })
    }

    /// Frame the receiver is currently locked onto, if any.
    pub fn locked_frame(&self, rx: NodeId) -> Option<&AirFrame> {
        self.rx[rx].lock.frame.as_ref().map(|f| &f.frame)
    }

    /// Carrier sense: busy when a detectable preamble is on the air at the
    /// listener or the summed in-band energy reaches the energy-detect level.
    pub fn carrier_sense(&self, listener: NodeId) -> ChannelState {
        let state = &self.rx[listener];
        let detect = self.detect_mw[listener];
        let mut energy = 0.0;
        for a in &state.arriving {
            if a.power_mw >= detect {
                return ChannelState::Busy;
            }
            energy += a.power_mw;
        }
        if energy >= self.ed_mw[listener] {
            ChannelState::Busy
        } else {
            ChannelState::Idle
        }
    }
}
