//! Application packet generators: a periodic control source and a bursty
//! bulk source.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::sim::{RngStream, SimTime};

/// UDP 8 + IPv4 20 + LLC/SNAP 8 + MAC header 24 + FCS 4.
pub const STACK_OVERHEAD_BYTES: u32 = 64;

/// Timestamp plus sequence number carried in every periodic payload.
pub const APP_HEADER_BYTES: u32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicProfile {
    pub period_s: f64,
    pub payload_bytes: u32,
}

impl Default for PeriodicProfile {
    fn default() -> Self {
        PeriodicProfile {
            period_s: 0.5,
            payload_bytes: 22,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstyProfile {
    pub idle_mean_s: f64,
    pub idle_cap_s: f64,
    pub burst_mean: f64,
    pub burst_cap: u32,
    pub spacing_s: f64,
    pub payload_bytes: u32,
}

impl Default for BurstyProfile {
    fn default() -> Self {
        BurstyProfile {
            idle_mean_s: 250e-6,
            idle_cap_s: 10.0,
            burst_mean: 100.0,
            burst_cap: 500,
            spacing_s: 500e-6,
            payload_bytes: 1472,
        }
    }
}

/// One burst drawn from a [`BurstyProfile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burst {
    pub start: SimTime,
    pub count: u32,
    pub spacing: SimTime,
    /// Gap between the burst's last packet and the next burst's first.
    pub idle_after: SimTime,
}

impl Burst {
    pub fn last_packet_time(&self) -> SimTime {
        self.start + self.spacing.times(u64::from(self.count - 1))
    }

    pub fn next_start(&self) -> SimTime {
        self.last_packet_time() + self.idle_after
    }
}

impl BurstyProfile {
    pub fn draw_burst(&self, start: SimTime, rng: &mut RngStream) -> Result<Burst> {
        let count = rng.draw_exponential_count(self.burst_mean, self.burst_cap);
        let idle = rng.draw_exponential(self.idle_mean_s, self.idle_cap_s)?;
        Ok(Burst {
            start,
            count,
            spacing: SimTime::from_secs_f64(self.spacing_s),
            idle_after: SimTime::from_secs_f64(idle),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrafficProfile {
    Periodic(PeriodicProfile),
    Bursty(BurstyProfile),
}

impl TrafficProfile {
    pub fn payload_bytes(&self) -> u32 {
        match self {
            TrafficProfile::Periodic(p) => p.payload_bytes,
            TrafficProfile::Bursty(b) => b.payload_bytes,
        }
    }

    pub fn psdu_bytes(&self) -> u32 {
        self.payload_bytes() + STACK_OVERHEAD_BYTES
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidParameter(m.to_string()));
        match self {
            TrafficProfile::Periodic(p) => {
                if !(p.period_s > 0.0 && p.period_s.is_finite()) {
                    return bad("period_s must be positive");
                }
                if p.payload_bytes < APP_HEADER_BYTES {
                    return bad("periodic payload must hold the 12 B application header");
                }
            }
            TrafficProfile::Bursty(b) => {
                let positive = [b.idle_mean_s, b.idle_cap_s, b.burst_mean, b.spacing_s];
                if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad("bursty profile times and means must be positive");
                }
                if b.burst_cap < 1 || b.payload_bytes == 0 {
                    return bad("burst_cap and payload_bytes must be at least 1");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AppPacket {
    pub seqno: u64,
    pub gen_time: SimTime,
    pub payload_size: u32,
}

impl AppPacket {
    pub fn psdu_bytes(&self) -> u32 {
        self.payload_size + STACK_OVERHEAD_BYTES
    }
}

/// A running generator. The simulation calls [`TrafficSource::on_tick`] at
/// [`TrafficSource::next_time`] and reschedules at the returned time.
#[derive(Debug, Clone)]
pub struct TrafficSource {
    profile: TrafficProfile,
    next_seq: u64,
    next_time: SimTime,
    left_in_burst: u32,
}

impl TrafficSource {
    pub fn new(profile: TrafficProfile, start: SimTime) -> Result<Self> {
        profile.validate()?;
        Ok(TrafficSource {
            profile,
            next_seq: 0,
            next_time: start,
            left_in_burst: 0,
        })
    }

    pub fn profile(&self) -> &TrafficProfile {
        &self.profile
    }

    pub fn next_time(&self) -> SimTime {
        self.next_time
    }

    pub fn generated(&self) -> u64 {
        self.next_seq
    }

    /// Emits the packet due at `now` and returns it with the time of the
    /// following one.
    pub fn on_tick(&mut self, now: SimTime, rng: &mut RngStream) -> (AppPacket, SimTime) {
        debug_assert_eq!(now, self.next_time);
        let packet = AppPacket {
            seqno: self.next_seq,
            gen_time: now,
            payload_size: self.profile.payload_bytes(),
        };
        self.next_seq += 1;
        self.next_time = match &self.profile {
            TrafficProfile::Periodic(p) => now + SimTime::from_secs_f64(p.period_s),
            TrafficProfile::Bursty(b) => {
                if self.left_in_burst == 0 {
                    self.left_in_burst = rng.draw_exponential_count(b.burst_mean, b.burst_cap);
                }
                self.left_in_burst -= 1;
                if self.left_in_burst > 0 {
                    now + SimTime::from_secs_f64(b.spacing_s)
                } else {
                    let idle = rng
                        .draw_exponential(b.idle_mean_s, b.idle_cap_s)
                        .expect("profile validated at construction");
                    now + SimTime::from_secs_f64(idle)
                }
            }
        };
        (packet, self.next_time)
    }
}
