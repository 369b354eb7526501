use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::SimError;

/// What a random stream is used for. Each (node, purpose) pair gets its own
/// stream so that adding draws in one consumer never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamPurpose {
    Traffic = 0,
    Backoff = 1,
    RateControl = 2,
    Reception = 3,
    Beacon = 4,
}

/// Seeded pseudo-random stream.
///
/// Identical `(seed, stream_id)` pairs produce identical sequences; distinct
/// stream ids select independent ChaCha streams under the same key.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    /// Stream for a given node and purpose.
    pub fn for_node(seed: u64, node: usize, purpose: StreamPurpose) -> Self {
        Self::new(seed, ((node as u64) << 8) | purpose as u64)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform float in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer in `[0, hi]` inclusive.
    pub fn uniform_inclusive(&mut self, hi: u32) -> u32 {
        self.rng.random_range(0..=hi)
    }

    /// Uniform index in `[0, n)`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.uniform() < p
        }
    }

    /// Exponential sample with the given mean, clipped to `cap`. Units are
    /// whatever the caller uses for `mean` and `cap` (seconds in the traffic
    /// generators).
    pub fn draw_exponential(&mut self, mean: f64, cap: f64) -> Result<f64, SimError> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(SimError::InvalidParameter(format!(
                "exponential mean must be positive, got {mean}"
            )));
        }
        if !(cap > 0.0) {
            return Err(SimError::InvalidParameter(format!(
                "exponential cap must be positive, got {cap}"
            )));
        }
        let unit: f64 = Exp1.sample(&mut self.rng);
        Ok((unit * mean).min(cap))
    }

    /// Integer count drawn from an exponential with the given mean, rounded
    /// to the nearest integer, bumped to 1 when it rounds to zero, and capped.
    pub fn draw_exponential_count(&mut self, mean: f64, cap: u32) -> u32 {
        let cap = cap.max(1);
        if !(mean > 0.0) {
            return 1;
        }
        let unit: f64 = Exp1.sample(&mut self.rng);
        let rounded = (unit * mean).round();
        if rounded < 1.0 {
            1
        } else if rounded >= cap as f64 {
            cap
        } else {
            rounded as u32
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_reproduce() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 4);
        let xs: Vec<u64> = (0..16).map(|_| a.uniform().to_bits()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.uniform().to_bits()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let n = 100_000;
        let mut a = RngStream::new(1, 0);
        let mut b = RngStream::new(1, 1);
        let xs: Vec<f64> = (0..n).map(|_| a.uniform()).collect();
        let ys: Vec<f64> = (0..n).map(|_| b.uniform()).collect();
        let r = crate::metrics::pearson(&xs, &ys).unwrap();
        // 4 sigma for n = 1e5 is about 0.0126.
        assert!(r.abs() < 0.0126, "r = {r}");
    }

    #[test]
    fn exponential_respects_cap() {
        let mut s = RngStream::new(1, 0);
        for _ in 0..100_000 {
            let x = s.draw_exponential(250e-6, 10.0).unwrap();
            assert!((0.0..=10.0).contains(&x));
        }
    }

    #[test]
    fn exponential_cap_at_mean_truncates() {
        let mut s = RngStream::new(2, 0);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| s.draw_exponential(1.0, 1.0).unwrap()).sum::<f64>() / n as f64;
        // E[min(X, 1)] = 1 - e^-1 for unit-mean X.
        assert!(mean < 1.0);
        assert!((mean - (1.0 - (-1.0f64).exp())).abs() < 0.01, "{mean}");
    }

    #[test]
    fn exponential_mean_converges() {
        let mut s = RngStream::new(3, 0);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| s.draw_exponential(250e-6, 10.0).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 250e-6).abs() < 2.5e-6, "{mean}");
    }

    #[test]
    fn exponential_rejects_bad_mean() {
        let mut s = RngStream::new(0, 0);
        assert!(s.draw_exponential(0.0, 1.0).is_err());
        assert!(s.draw_exponential(-1.0, 1.0).is_err());
        assert!(s.draw_exponential(1.0, 0.0).is_err());
    }

    #[test]
    fn count_bounds_and_small_mean() {
        let mut s = RngStream::new(4, 0);
        for _ in 0..100_000 {
            let k = s.draw_exponential_count(100.0, 500);
            assert!((1..=500).contains(&k));
        }
        for _ in 0..1000 {
            assert_eq!(s.draw_exponential_count(1e-9, 500), 1);
        }
    }

    #[test]
    fn count_mean_matches_rounded_distribution() {
        // Oracle: E[clamp(round(X), 1, 500)] for X ~ Exp(mean 100), by direct
        // summation over the integer support.
        let mean = 100.0f64;
        let cdf = |x: f64| 1.0 - (-x / mean).exp();
        let mut expected = cdf(1.5); // rounds to 0 or 1, reported as 1
        for k in 2..500u32 {
            let kf = k as f64;
            expected += kf * (cdf(kf + 0.5) - cdf(kf - 0.5));
        }
        expected += 500.0 * (1.0 - cdf(499.5));

        let mut s = RngStream::new(5, 0);
        let n = 1_000_000;
        let got: f64 = (0..n).map(|_| s.draw_exponential_count(100.0, 500) as f64).sum::<f64>() / n as f64;
        assert!((got - expected).abs() < 0.5, "got {got}, oracle {expected}");
        assert!((got - 100.0).abs() < 2.0, "got {got}");
    }
}
