//! Discrete-event simulator of a single IEEE 802.11a infrastructure cell.
//!
//! An access point, a station under test sending small periodic packets and
//! optionally an interfering station with bursty bulk traffic share one
//! channel. Stations run DCF with Minstrel rate adaptation over a log-distance
//! path-loss channel. Each run logs the fate of every packet of the station
//! under test and reduces the log to loss, latency, rate and energy metrics.
//!
//! ```no_run
//! use dcf_sim::scenario::{ConfigName, ScenarioConfig};
//!
//! let result = ScenarioConfig::new(ConfigName::Hidden, 20.0)
//!     .with_duration(200.0)
//!     .run()
//!     .unwrap();
//! println!("PLR {:.4}  mean latency {:?} us", result.summary.plr, result.summary.mu_d_us);
//! ```

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod mac;
pub mod metrics;
pub mod minstrel;
pub mod network;
pub mod output;
pub mod phy;
pub mod scenario;
pub mod sim;
pub mod traffic;

pub use error::{Result, SimError};
