use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::phy::{frame_airtime, RateId};
use crate::sim::{RngStream, SimTime};

/// Size of an ACK frame: frame control, duration, RA and FCS.
pub const ACK_BYTES: u32 = 14;

/// DCF timing and retry parameters. Defaults are the 802.11a (5 GHz OFDM)
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacParams {
    pub sifs_us: u64,
    pub slot_us: u64,
    pub difs_us: u64,
    pub cw_min: u32,
    pub cw_max: u32,
    /// Retransmissions allowed after the first attempt.
    pub retry_limit: u32,
    pub ack_timeout_us: u64,
    pub basic_rates: Vec<RateId>,
    /// Drop-tail bound on the transmit queue, in frames.
    pub queue_limit: usize,
}

impl Default for MacParams {
    fn default() -> Self {
        MacParams {
            sifs_us: 16,
            slot_us: 9,
            difs_us: 34,
            cw_min: 15,
            cw_max: 1023,
            retry_limit: 13,
            // SIFS + slot + preamble/SIGNAL detection window.
            ack_timeout_us: 45,
            basic_rates: vec![RateId::R6, RateId::R12, RateId::R24],
            queue_limit: 500,
        }
    }
}

impl MacParams {
    pub fn validate(&self) -> Result<()> {
        if self.difs_us != self.sifs_us + 2 * self.slot_us {
            return Err(SimError::InvalidParameter(format!(
                "DIFS must equal SIFS + 2 slots ({} != {} + 2*{})",
                self.difs_us, self.sifs_us, self.slot_us
            )));
        }
        if self.cw_min >= self.cw_max {
            return Err(SimError::InvalidParameter("cw_min must be below cw_max".into()));
        }
        if self.basic_rates.is_empty() {
            return Err(SimError::InvalidParameter("at least one basic rate required".into()));
        }
        if self.slot_us == 0 || self.queue_limit == 0 {
            return Err(SimError::InvalidParameter(
                "slot and queue limit must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn sifs(&self) -> SimTime {
        SimTime::from_micros(self.sifs_us)
    }

    pub fn slot(&self) -> SimTime {
        SimTime::from_micros(self.slot_us)
    }

    pub fn difs(&self) -> SimTime {
        SimTime::from_micros(self.difs_us)
    }

    pub fn ack_timeout(&self) -> SimTime {
        SimTime::from_micros(self.ack_timeout_us)
    }

    pub fn lowest_basic_rate(&self) -> RateId {
        self.basic_rates.iter().copied().min().unwrap_or(RateId::LOWEST)
    }

    /// SIFS + DIFS + an ACK at the lowest basic rate.
    pub fn eifs(&self) -> SimTime {
        self.sifs() + self.difs() + frame_airtime(ACK_BYTES, self.lowest_basic_rate())
    }

    /// Attempt budget per frame: the first try plus every retry.
    pub fn max_attempts(&self) -> u32 {
        1 + self.retry_limit
    }
}

/// Backoff counter drawn uniformly from `[0, cw]`.
pub fn backoff_draw(cw: u32, rng: &mut RngStream) -> u32 {
    if cw == 0 {
        0
    } else {
        rng.uniform_inclusive(cw)
    }
}

/// Contention window after a failed attempt: `min(2 (cw + 1) - 1, cw_max)`.
pub fn next_cw(cw: u32, params: &MacParams) -> u32 {
    (2 * (cw + 1) - 1).min(params.cw_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_consistent() {
        let p = MacParams::default();
        p.validate().unwrap();
        assert_eq!(p.eifs(), SimTime::from_micros(94));
        assert_eq!(p.max_attempts(), 14);
        let bad = MacParams {
            difs_us: 50,
            ..p.clone()
        };
        assert!(bad.validate().is_err());
        let bad = MacParams { cw_min: 2000, ..p };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cw_doubling() {
        let p = MacParams::default();
        assert_eq!(next_cw(15, &p), 31);
        assert_eq!(next_cw(1023, &p), 1023);
        let mut cw = p.cw_min;
        let mut seq = vec![cw];
        for _ in 0..8 {
            cw = next_cw(cw, &p);
            seq.push(cw);
        }
        assert_eq!(seq, vec![15, 31, 63, 127, 255, 511, 1023, 1023, 1023]);
        // Closed form: min(2^k (cw_min + 1) - 1, cw_max).
        for (k, cw) in seq.iter().enumerate() {
            assert_eq!(*cw, ((1u32 << k) * (p.cw_min + 1) - 1).min(p.cw_max));
        }
    }

    #[test]
    fn backoff_is_uniform() {
        let mut rng = RngStream::new(9, 1);
        assert_eq!(backoff_draw(0, &mut rng), 0);
        let n = 16_000;
        let mut counts = [0u32; 16];
        for _ in 0..n {
            counts[backoff_draw(15, &mut rng) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0));
        let e = n as f64 / 16.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 15 dof, 99.9% quantile.
        assert!(chi2 < 37.70, "chi2 = {chi2}");
    }

    #[test]
    fn backoff_reproducible() {
        let mut a = RngStream::new(3, 1);
        let mut b = RngStream::new(3, 1);
        let xs: Vec<u32> = (0..64).map(|_| backoff_draw(1023, &mut a)).collect();
        let ys: Vec<u32> = (0..64).map(|_| backoff_draw(1023, &mut b)).collect();
        assert_eq!(xs, ys);
    }
}
