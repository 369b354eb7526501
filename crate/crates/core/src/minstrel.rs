//! Minstrel rate adaptation for legacy OFDM rates.
//!
//! Per-rate success statistics are folded into an EWMA every stats interval.
//! Rates are ranked by expected throughput, and each packet gets a retry
//! chain that starts at the best-throughput rate and falls back towards the
//! most reliable and finally the lowest rate. A fraction of packets samples
//! a random other rate.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::mac::{MacParams, ACK_BYTES};
use crate::phy::{frame_airtime_us, response_rate, RateId};
use crate::sim::{RngStream, SimTime};

const RATE_COUNT: usize = RateId::ALL.len();

/// Success probability above which a rate counts as reliable when picking the
/// fallback rate.
const RELIABLE_PROB: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinstrelParams {
    /// Weight of the previous EWMA value.
    pub ewma_weight: f64,
    pub update_interval_ms: u64,
    pub probe_probability: f64,
    /// Attempts granted to the best-throughput, second-best, best-probability
    /// and lowest-rate segments.
    pub segment_attempts: [u32; 4],
    /// How many times a slower sampling candidate may be demoted to the
    /// second slot before it is sent first.
    pub max_sample_skips: u32,
}

impl Default for MinstrelParams {
    fn default() -> Self {
        MinstrelParams {
            ewma_weight: 0.75,
            update_interval_ms: 100,
            probe_probability: 0.1,
            segment_attempts: [4, 4, 4, 2],
            max_sample_skips: 20,
        }
    }
}

impl MinstrelParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ewma_weight) {
            return Err(SimError::InvalidParameter("ewma_weight must be in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.probe_probability) {
            return Err(SimError::InvalidParameter("probe_probability must be in [0, 1]".into()));
        }
        if self.update_interval_ms == 0 {
            return Err(SimError::InvalidParameter("update_interval_ms must be positive".into()));
        }
        if self.segment_attempts.contains(&0) {
            return Err(SimError::InvalidParameter(
                "retry chain segments must be non-empty".into(),
            ));
        }
        Ok(())
    }

    pub fn update_interval(&self) -> SimTime {
        SimTime::from_millis(self.update_interval_ms)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RateStats {
    pub attempts_window: u64,
    pub successes_window: u64,
    pub ewma_prob: f64,
    /// Whether any window with attempts has been folded in yet.
    pub sampled: bool,
    pub est_throughput: f64,
    pub lifetime_attempts: u64,
    pub lifetime_successes: u64,
    pub samples_skipped: u32,
}

/// Ordered `(rate, attempts)` segments. Attempts past the end of the chain
/// use the lowest rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryChain {
    pub segments: Vec<(RateId, u32)>,
}

impl RetryChain {
    pub fn rate_for(&self, attempt_index: u32) -> RateId {
        let mut left = attempt_index;
        for &(rate, n) in &self.segments {
            if left < n {
                return rate;
            }
            left -= n;
        }
        RateId::LOWEST
    }

    pub fn total_attempts(&self) -> u32 {
        self.segments.iter().map(|s| s.1).sum()
    }
}

/// Duration of an unimpeded exchange: DIFS, the data frame, SIFS and the ACK.
pub fn perfect_transaction_us(rate: RateId, psdu_bytes: u32, mac: &MacParams) -> u64 {
    let ack_rate = response_rate(rate, &mac.basic_rates);
    mac.difs_us + frame_airtime_us(psdu_bytes, rate) + mac.sifs_us + frame_airtime_us(ACK_BYTES, ack_rate)
}

/// Expected goodput in bits per microsecond (numerically Mb/s).
pub fn throughput_estimate(rate: RateId, ewma_prob: f64, psdu_bytes: u32, mac: &MacParams) -> f64 {
    let bits = 8.0 * psdu_bytes as f64;
    ewma_prob * bits / perfect_transaction_us(rate, psdu_bytes, mac) as f64
}

#[derive(Debug, Clone)]
pub struct Minstrel {
    params: MinstrelParams,
    mac: MacParams,
    psdu_bytes: u32,
    stats: [RateStats; RATE_COUNT],
    perfect_us: [u64; RATE_COUNT],
    best_tp: RateId,
    second_tp: RateId,
    best_prob: RateId,
    plan: RetryChain,
    probing: bool,
    probes: u64,
    first_attempts: u64,
}

impl Minstrel {
    /// Creates rate control for a station whose data frames are
    /// `psdu_bytes` long.
    pub fn new(params: MinstrelParams, mac: MacParams, psdu_bytes: u32) -> Self {
        let perfect_us = RateId::ALL.map(|r| perfect_transaction_us(r, psdu_bytes, &mac));
        let mut m = Minstrel {
            params,
            mac,
            psdu_bytes,
            stats: [RateStats::default(); RATE_COUNT],
            perfect_us,
            best_tp: RateId::HIGHEST,
            second_tp: RateId::HIGHEST,
            best_prob: RateId::HIGHEST,
            plan: RetryChain { segments: vec![] },
            probing: false,
            probes: 0,
            first_attempts: 0,
        };
        m.rank();
        m.plan = m.normal_chain();
        m
    }

    pub fn params(&self) -> &MinstrelParams {
        &self.params
    }

    pub fn stats(&self, rate: RateId) -> &RateStats {
        &self.stats[rate.index()]
    }

    pub fn best_throughput_rate(&self) -> RateId {
        self.best_tp
    }

    pub fn second_throughput_rate(&self) -> RateId {
        self.second_tp
    }

    pub fn best_probability_rate(&self) -> RateId {
        self.best_prob
    }

    /// Number of first attempts that were sampling (probe) transmissions.
    pub fn probe_count(&self) -> u64 {
        self.probes
    }

    pub fn first_attempt_count(&self) -> u64 {
        self.first_attempts
    }

    /// Whether the packet currently in service is a sampling packet.
    pub fn is_probing(&self) -> bool {
        self.probing
    }

    /// The retry chain used for packets that do not sample.
    pub fn normal_chain(&self) -> RetryChain {
        let [a, b, c, d] = self.params.segment_attempts;
        self.fit([
            (self.best_tp, a),
            (self.second_tp, b),
            (self.best_prob, c),
            (RateId::LOWEST, d),
        ])
    }

    /// Truncates segments so the chain never exceeds the MAC's attempt budget.
    fn fit(&self, chain: [(RateId, u32); 4]) -> RetryChain {
        let mut left = self.mac.max_attempts();
        let mut segments = Vec::with_capacity(4);
        for (rate, n) in chain {
            let n = n.min(left);
            if n > 0 {
                segments.push((rate, n));
            }
            left -= n;
        }
        RetryChain { segments }
    }

    pub fn current_plan(&self) -> &RetryChain {
        &self.plan
    }

    fn sample_chain(&mut self, rng: &mut RngStream) -> Option<RetryChain> {
        if !rng.bernoulli(self.params.probe_probability) {
            return None;
        }
        let best = self.best_tp.index();
        let mut pick = rng.index(RATE_COUNT - 1);
        if pick >= best {
            pick += 1;
        }
        let sample = RateId::ALL[pick];
        let max_attempts = self.mac.max_attempts();
        let slower = self.perfect_us[pick] > self.perfect_us[best];
        let stats = &mut self.stats[pick];
        let [a, _, c, _] = self.params.segment_attempts;
        let chain = if slower && stats.samples_skipped < self.params.max_sample_skips {
            stats.samples_skipped += 1;
            [
                (self.best_tp, 1),
                (sample, 1),
                (self.best_prob, c),
                (RateId::LOWEST, max_attempts),
            ]
        } else {
            stats.samples_skipped = 0;
            [
                (sample, 1),
                (self.best_tp, a),
                (self.best_prob, c),
                (RateId::LOWEST, max_attempts),
            ]
        };
        Some(self.fit(chain))
    }

    /// Rate for attempt `attempt_index` (0 = first transmission) of the
    /// packet in service. Attempt 0 decides whether the packet samples.
    pub fn select_rate(&mut self, attempt_index: u32, rng: &mut RngStream) -> RateId {
        if attempt_index == 0 {
            self.first_attempts += 1;
            match self.sample_chain(rng) {
                Some(chain) => {
                    self.probes += 1;
                    self.probing = true;
                    self.plan = chain;
                }
                None => {
                    self.probing = false;
                    self.plan = self.normal_chain();
                }
            }
        }
        self.plan.rate_for(attempt_index)
    }

    pub fn record_outcome(&mut self, rate: RateId, success: bool) {
        let s = &mut self.stats[rate.index()];
        s.attempts_window += 1;
        s.lifetime_attempts += 1;
        if success {
            s.successes_window += 1;
            s.lifetime_successes += 1;
        }
    }

    /// Folds the current window into the EWMA and re-ranks the rates.
    pub fn update_stats(&mut self) {
        let w = self.params.ewma_weight;
        for (i, s) in self.stats.iter_mut().enumerate() {
            if s.attempts_window > 0 {
                let p = s.successes_window as f64 / s.attempts_window as f64;
                s.ewma_prob = if s.sampled { (1.0 - w) * p + w * s.ewma_prob } else { p };
                s.sampled = true;
                s.attempts_window = 0;
                s.successes_window = 0;
            }
            s.est_throughput = throughput_estimate(RateId::ALL[i], s.ewma_prob, self.psdu_bytes, &self.mac);
        }
        self.rank();
    }

    fn rank(&mut self) {
        // Iterating fastest-first with strict comparisons breaks ties in
        // favour of the faster rate.
        let by_speed = RateId::ALL.iter().rev().copied();
        let tp = |r: RateId| self.stats[r.index()].est_throughput;
        let mut best = RateId::HIGHEST;
        for r in by_speed.clone() {
            if tp(r) > tp(best) {
                best = r;
            }
        }
        let mut second: Option<RateId> = None;
        for r in by_speed.clone().filter(|&r| r != best) {
            if second.is_none_or(|s| tp(r) > tp(s)) {
                second = Some(r);
            }
        }
        let prob = |r: RateId| self.stats[r.index()].ewma_prob;
        let mut best_prob: Option<RateId> = None;
        for r in by_speed {
            best_prob = match best_prob {
                None => Some(r),
                Some(b) => {
                    let (pr, pb) = (prob(r), prob(b));
                    let better = if pr >= RELIABLE_PROB && pb >= RELIABLE_PROB {
                        tp(r) > tp(b)
                    } else {
                        pr > pb
                    };
                    Some(if better { r } else { b })
                }
            };
        }
        self.best_tp = best;
        self.second_tp = second.unwrap_or(best);
        self.best_prob = best_prob.unwrap_or(best);
    }
}
