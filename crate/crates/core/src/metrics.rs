//! Per-packet records and the summary statistics computed from them.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::mac::{AttemptOutcome, TxAttempt};
use crate::phy::RateId;
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketOutcome {
    Acked,
    Dropped,
}

/// Fate of one application packet of the station under test.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub seqno: u64,
    pub gen_time: SimTime,
    pub outcome: PacketOutcome,
    /// Generation to ACK reception; present only for acked packets.
    pub latency: Option<SimTime>,
    pub attempts: Vec<TxAttempt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub packets: u64,
    pub acked: u64,
    pub dropped: u64,
    pub plr: f64,
    pub mu_d_us: Option<f64>,
    pub sigma_d_us: Option<f64>,
    pub d_min_us: Option<f64>,
    pub p99_us: Option<f64>,
    pub p999_us: Option<f64>,
    pub mu_a: Option<f64>,
    pub mu_r_mbps: Option<f64>,
    /// Mean transmit power spent on data frames, watts.
    pub mu_p_w: f64,
    /// Attempts per rate, slowest first.
    pub f_r: [u64; 8],
    /// Successes per rate, slowest first.
    pub successes_r: [u64; 8],
}

impl MetricsSummary {
    pub fn mu_p_uw(&self) -> f64 {
        self.mu_p_w * 1e6
    }

    /// Relative success frequency per rate; `None` where the rate was never
    /// tried.
    pub fn s_r(&self) -> [Option<f64>; 8] {
        std::array::from_fn(|i| (self.f_r[i] > 0).then(|| self.successes_r[i] as f64 / self.f_r[i] as f64))
    }

    pub fn total_attempts(&self) -> u64 {
        self.f_r.iter().sum()
    }

    /// Most frequently used rate (ties go to the faster rate).
    pub fn modal_rate(&self) -> Option<RateId> {
        let mut best: Option<usize> = None;
        for i in (0..8).rev() {
            if self.f_r[i] > 0 && best.is_none_or(|b| self.f_r[i] > self.f_r[b]) {
                best = Some(i);
            }
        }
        best.and_then(RateId::from_index)
    }
}

/// Nearest-rank percentile of an ascending slice: element `ceil(p*N) - 1`.
pub fn percentile<T: Copy>(sorted: &[T], p: f64) -> Result<T> {
    if sorted.is_empty() {
        return Err(SimError::EmptyLog);
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(SimError::InvalidParameter(format!("percentile {p} outside (0, 1]")));
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(SimError::InvalidParameter(
            "pearson needs two equal-length samples of at least 2 points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(SimError::Undefined(
            "pearson correlation of a zero-variance sample".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Mean radiated power over the run from the airtime of every attempt.
pub fn mean_tx_power_w<'a>(
    attempts: impl IntoIterator<Item = &'a TxAttempt>,
    tx_power_mw: f64,
    sim_duration_s: f64,
) -> f64 {
    let airtime_s: f64 = attempts.into_iter().map(|a| a.airtime.as_secs_f64()).sum();
    tx_power_mw * 1e-3 * airtime_s / sim_duration_s
}

/// Computes every summary metric. Latency statistics and mean attempts use
/// delivered packets only; loss, rate usage and power include dropped ones.
pub fn summarize(log: &[PacketRecord], sim_duration_s: f64, tx_power_mw: f64) -> Result<MetricsSummary> {
    if log.is_empty() {
        return Err(SimError::EmptyLog);
    }
    if !(sim_duration_s > 0.0) {
        return Err(SimError::InvalidParameter(
            "simulation duration must be positive".into(),
        ));
    }
    let mut latencies: Vec<u64> = Vec::with_capacity(log.len());
    let mut acked_attempts = 0u64;
    let mut f_r = [0u64; 8];
    let mut successes_r = [0u64; 8];
    let mut rate_sum = 0.0;
    for rec in log {
        for a in &rec.attempts {
            let i = a.rate.index();
            f_r[i] += 1;
            if a.outcome == AttemptOutcome::Acked {
                successes_r[i] += 1;
            }
            rate_sum += a.rate.mbps() as f64;
        }
        if rec.outcome == PacketOutcome::Acked {
            let latency = rec
                .latency
                .ok_or_else(|| SimError::InvalidParameter(format!("acked packet {} has no latency", rec.seqno)))?;
            latencies.push(latency.as_nanos());
            acked_attempts += rec.attempts.len() as u64;
        }
    }
    let packets = log.len() as u64;
    let acked = latencies.len() as u64;
    let dropped = packets - acked;
    let total_attempts: u64 = f_r.iter().sum();
    latencies.sort_unstable();

    let to_us = |ns: u64| ns as f64 / 1e3;
    let (mu_d, sigma_d, d_min, p99, p999, mu_a) = if latencies.is_empty() {
        (None, None, None, None, None, None)
    } else {
        let n = latencies.len() as f64;
        let mean = latencies.iter().map(|&x| to_us(x)).sum::<f64>() / n;
        let var = latencies.iter().map(|&x| (to_us(x) - mean).powi(2)).sum::<f64>() / n;
        (
            Some(mean),
            Some(var.sqrt()),
            Some(to_us(latencies[0])),
            Some(to_us(percentile(&latencies, 0.99)?)),
            Some(to_us(percentile(&latencies, 0.999)?)),
            Some(acked_attempts as f64 / n),
        )
    };
    Ok(MetricsSummary {
        packets,
        acked,
        dropped,
        plr: dropped as f64 / packets as f64,
        mu_d_us: mu_d,
        sigma_d_us: sigma_d,
        d_min_us: d_min,
        p99_us: p99,
        p999_us: p999,
        mu_a,
        mu_r_mbps: (total_attempts > 0).then(|| rate_sum / total_attempts as f64),
        mu_p_w: mean_tx_power_w(log.iter().flat_map(|r| &r.attempts), tx_power_mw, sim_duration_s),
        f_r,
        successes_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn attempt(rate: RateId, outcome: AttemptOutcome) -> TxAttempt {
        TxAttempt {
            rate,
            airtime: SimTime::from_micros(crate::phy::frame_airtime_us(86, rate)),
            start: SimTime::ZERO,
            outcome,
        }
    }

    fn acked(seq: u64, latency_us: u64, attempts: Vec<TxAttempt>) -> PacketRecord {
        PacketRecord {
            seqno: seq,
            gen_time: SimTime::from_millis(500 * seq),
            outcome: PacketOutcome::Acked,
            latency: Some(SimTime::from_micros(latency_us)),
            attempts,
        }
    }

    #[test]
    fn all_first_attempt_at_54() {
        let log: Vec<_> = (0..1000)
            .map(|i| acked(i, 114, vec![attempt(RateId::R54, AttemptOutcome::Acked)]))
            .collect();
        let s = summarize(&log, 500.0, 40.0).unwrap();
        assert_eq!(s.plr, 0.0);
        assert_eq!(s.mu_a, Some(1.0));
        assert_eq!(s.mu_r_mbps, Some(54.0));
        assert_eq!(s.modal_rate(), Some(RateId::R54));
        // 40 mW for 36 µs every 0.5 s.
        assert_relative_eq!(s.mu_p_uw(), 2.88, max_relative = 1e-12);
    }

    #[test]
    fn drops_count_toward_loss_not_latency() {
        let mut log: Vec<_> = (0..993)
            .map(|i| acked(i, 120, vec![attempt(RateId::R54, AttemptOutcome::Acked)]))
            .collect();
        for i in 993..1000 {
            log.push(PacketRecord {
                seqno: i,
                gen_time: SimTime::ZERO,
                outcome: PacketOutcome::Dropped,
                latency: None,
                attempts: vec![attempt(RateId::R6, AttemptOutcome::Failed); 14],
            });
        }
        let s = summarize(&log, 500.0, 40.0).unwrap();
        assert_relative_eq!(s.plr, 0.007);
        assert_eq!(s.mu_a, Some(1.0));
        assert_eq!(s.mu_d_us, Some(120.0));
        assert_eq!(s.f_r[0], 98);
        assert_eq!(s.total_attempts(), 993 + 98);
        assert_eq!(s.s_r()[0], Some(0.0));
        assert_eq!(s.s_r()[7], Some(1.0));
        assert_eq!(s.s_r()[3], None);
    }

    #[test]
    fn no_delivery_means_no_latency() {
        let log = vec![PacketRecord {
            seqno: 0,
            gen_time: SimTime::ZERO,
            outcome: PacketOutcome::Dropped,
            latency: None,
            attempts: vec![attempt(RateId::R6, AttemptOutcome::Failed); 14],
        }];
        let s = summarize(&log, 10.0, 40.0).unwrap();
        assert_eq!(s.plr, 1.0);
        assert!(s.mu_d_us.is_none() && s.mu_a.is_none() && s.p999_us.is_none());
        assert!(summarize(&[], 10.0, 40.0).is_err());
    }

    #[test]
    fn percentile_examples() {
        let v: Vec<u32> = (1..=100).collect();
        assert_eq!(percentile(&v, 0.99).unwrap(), 99);
        assert_eq!(percentile(&v, 0.999).unwrap(), 100);
        assert_eq!(percentile(&[7], 0.5).unwrap(), 7);
        assert!(percentile::<u32>(&[], 0.5).is_err());
    }

    #[test]
    fn pearson_examples() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert_relative_eq!(pearson(&xs, &ys).unwrap(), 1.0);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert_relative_eq!(pearson(&xs, &neg).unwrap(), -1.0);
        assert!(pearson(&xs, &[1.0; 10]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn summary_orderings_and_conservation(
            lat in prop::collection::vec((100u64..50_000, 1usize..=14, any::<bool>()), 1..300)
        ) {
            let log: Vec<PacketRecord> = lat.iter().enumerate().map(|(i, &(l, n, ok))| {
                let mut attempts = vec![attempt(RateId::from_index(i % 8).unwrap(), AttemptOutcome::Failed); n];
                if ok {
                    attempts[n - 1].outcome = AttemptOutcome::Acked;
                    acked(i as u64, l, attempts)
                } else {
                    PacketRecord { seqno: i as u64, gen_time: SimTime::ZERO, outcome: PacketOutcome::Dropped, latency: None, attempts }
                }
            }).collect();
            let s = summarize(&log, 100.0, 40.0).unwrap();
            prop_assert_eq!(s.acked + s.dropped, s.packets);
            let n_attempts: usize = log.iter().map(|r| r.attempts.len()).sum();
            prop_assert_eq!(s.total_attempts() as usize, n_attempts);
            for (i, p) in s.s_r().iter().enumerate() {
                if let Some(p) = p {
                    prop_assert!((p * s.f_r[i] as f64 - s.successes_r[i] as f64).abs() < 1e-9);
                }
            }
            if let (Some(min), Some(mu), Some(p99), Some(p999)) = (s.d_min_us, s.mu_d_us, s.p99_us, s.p999_us) {
                prop_assert!(min <= mu + 1e-9);
                prop_assert!(p99 <= p999);
                let a = s.mu_a.unwrap();
                prop_assert!((1.0..=14.0).contains(&a));
            }
            let direct = mean_tx_power_w(log.iter().flat_map(|r| &r.attempts), 40.0, 100.0);
            prop_assert!((direct - s.mu_p_w).abs() <= 1e-12 * direct.abs().max(1e-30));
        }

        #[test]
        fn percentile_matches_sort_oracle(mut v in prop::collection::vec(0u64..1_000_000, 1..500), p in 0.001f64..1.0) {
            v.sort_unstable();
            let oracle = {
                let n = v.len();
                let mut k = 0usize;
                // Smallest rank k (1-based) with k >= p*n.
                while (k as f64) < p * n as f64 { k += 1; }
                v[k.max(1) - 1]
            };
            prop_assert_eq!(percentile(&v, p).unwrap(), oracle);
        }
    }
}
