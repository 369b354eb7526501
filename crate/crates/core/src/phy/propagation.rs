//! Log-distance path loss, received power, range and propagation delay.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::sim::SimTime;

/// Thermal noise power spectral density at 290 K.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Log-distance path loss: `L = L0 + 10 n log10(d / d0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    /// Loss at the reference distance, dB.
    pub ref_loss_db: f64,
    /// Reference distance, m.
    pub ref_distance_m: f64,
    pub exponent: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        PathLossParams {
            ref_loss_db: 46.6777,
            ref_distance_m: 1.0,
            exponent: 3.0,
        }
    }
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ref_distance_m > 0.0) || !(self.exponent > 0.0) || !self.ref_loss_db.is_finite() {
            return Err(SimError::InvalidParameter(format!(
                "path loss needs ref_distance_m > 0 and exponent > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub tx_power_dbm: f64,
    /// Minimum power at which a preamble is detected and the receiver locks.
    pub preamble_detect_dbm: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    /// Aggregate in-band energy above which the medium is busy regardless of
    /// decodability.
    pub energy_detect_dbm: f64,
    pub prop_speed_mps: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            tx_power_dbm: 16.0206,
            preamble_detect_dbm: -82.0,
            noise_figure_db: 7.0,
            bandwidth_hz: 20e6,
            energy_detect_dbm: -62.0,
            prop_speed_mps: 2.99792e8,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.preamble_detect_dbm < self.energy_detect_dbm) {
            return Err(SimError::InvalidParameter(
                "preamble_detect_dbm must be below energy_detect_dbm".into(),
            ));
        }
        if !(self.bandwidth_hz > 0.0) || !(self.prop_speed_mps > 0.0) {
            return Err(SimError::InvalidParameter(
                "bandwidth and propagation speed must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn tx_power_mw(&self) -> f64 {
        dbm_to_mw(self.tx_power_dbm)
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Path loss in dB at distance `d` meters. Distances shorter than the
/// reference distance are clamped to it.
pub fn path_loss_db(params: &PathLossParams, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(SimError::InvalidParameter(format!(
            "distance must be positive, got {d}"
        )));
    }
    let d = d.max(params.ref_distance_m);
    Ok(params.ref_loss_db + 10.0 * params.exponent * (d / params.ref_distance_m).log10())
}

pub fn rx_power_dbm(radio: &RadioParams, loss: &PathLossParams, d: f64) -> Result<f64> {
    Ok(radio.tx_power_dbm - path_loss_db(loss, d)?)
}

/// Distance at which the received power equals the preamble detection
/// threshold (closed-form inverse of the path loss law).
pub fn max_range(radio: &RadioParams, loss: &PathLossParams) -> f64 {
    let budget_db = radio.tx_power_dbm - radio.preamble_detect_dbm - loss.ref_loss_db;
    loss.ref_distance_m * 10f64.powf(budget_db / (10.0 * loss.exponent))
}

/// One-way propagation delay, rounded to the nearest nanosecond.
pub fn propagation_delay(radio: &RadioParams, d: f64) -> SimTime {
    SimTime::from_secs_f64(d.max(0.0) / radio.prop_speed_mps)
}

pub fn noise_floor_dbm(radio: &RadioParams) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + 10.0 * radio.bandwidth_hz.log10() + radio.noise_figure_db
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn path_loss_reference_points() {
        let p = PathLossParams::default();
        assert_abs_diff_eq!(path_loss_db(&p, 1.0).unwrap(), 46.6777, epsilon = 1e-12);
        assert_abs_diff_eq!(path_loss_db(&p, 10.0).unwrap(), 76.6777, epsilon = 1e-12);
        let p2 = PathLossParams { exponent: 2.2, ..p };
        assert_abs_diff_eq!(path_loss_db(&p2, 1.0).unwrap(), p2.ref_loss_db, epsilon = 1e-12);
    }

    #[test]
    fn path_loss_clamps_below_reference_and_rejects_nonpositive() {
        let p = PathLossParams::default();
        assert_eq!(path_loss_db(&p, 0.25).unwrap(), path_loss_db(&p, 1.0).unwrap());
        assert!(path_loss_db(&p, 0.0).is_err());
        assert!(path_loss_db(&p, -3.0).is_err());
    }

    #[test]
    fn received_power() {
        let r = RadioParams::default();
        let p = PathLossParams::default();
        assert_abs_diff_eq!(rx_power_dbm(&r, &p, 51.45).unwrap(), -82.0, epsilon = 0.01);
        assert_abs_diff_eq!(rx_power_dbm(&r, &p, 1.0).unwrap(), -30.6571, epsilon = 1e-9);
        assert!(rx_power_dbm(&r, &p, 52.0).unwrap() < r.preamble_detect_dbm);
    }

    #[test]
    fn range() {
        let r = RadioParams::default();
        let p = PathLossParams::default();
        let d = max_range(&r, &p);
        assert_abs_diff_eq!(d, 51.45, epsilon = 0.01);
        // Composing with rx power recovers the detection threshold.
        assert_abs_diff_eq!(rx_power_dbm(&r, &p, d).unwrap(), r.preamble_detect_dbm, epsilon = 1e-9);

        // +10 n log10(2) dB doubles the range.
        let louder = RadioParams {
            tx_power_dbm: r.tx_power_dbm + 10.0 * p.exponent * 2f64.log10(),
            ..r
        };
        assert_abs_diff_eq!(max_range(&louder, &p), 2.0 * d, epsilon = 1e-9);

        let n2 = PathLossParams { exponent: 2.0, ..p };
        let expected = 10f64.powf((16.0206 + 82.0 - 46.6777) / 20.0);
        assert_abs_diff_eq!(max_range(&r, &n2), expected, epsilon = 1e-9);
        assert!((max_range(&r, &n2) - 369.0).abs() < 1.0);
    }

    #[test]
    fn propagation() {
        let r = RadioParams::default();
        assert_eq!(propagation_delay(&r, 0.0), SimTime::ZERO);
        assert_eq!(propagation_delay(&r, 1.0), SimTime::from_nanos(3));
        // 51.45 m / c = 171.6 ns
        assert_eq!(propagation_delay(&r, 51.45), SimTime::from_nanos(172));
        assert_abs_diff_eq!(51.45 / r.prop_speed_mps * 1e9, 171.62, epsilon = 0.01);
    }

    #[test]
    fn noise_floor() {
        let r = RadioParams::default();
        assert_abs_diff_eq!(noise_floor_dbm(&r), -93.9897, epsilon = 1e-4);
        let one_hz = RadioParams {
            noise_figure_db: 0.0,
            bandwidth_hz: 1.0,
            ..r
        };
        assert_abs_diff_eq!(noise_floor_dbm(&one_hz), -174.0, epsilon = 1e-12);
        assert_abs_diff_eq!(-82.0 - noise_floor_dbm(&r), 12.0, epsilon = 0.02);
    }

    #[test]
    fn validation() {
        assert!(RadioParams::default().validate().is_ok());
        let bad = RadioParams {
            energy_detect_dbm: -90.0,
            ..RadioParams::default()
        };
        assert!(bad.validate().is_err());
        assert!(PathLossParams {
            exponent: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
