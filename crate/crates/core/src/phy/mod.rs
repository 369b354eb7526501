//! Radio propagation, 802.11a timing, error models and the shared medium.

mod error_model;
mod geometry;
mod medium;
mod propagation;
mod rates;

pub use error_model::{
    coded_ber, uncoded_ber, ErrorModel, ErrorModelChoice, DEFAULT_ANALYTIC_SNR_GAIN_DB, DEFAULT_SNR_THRESHOLDS_DB,
};
pub use geometry::Position;
pub use medium::{
    reception_outcome, AirFrame, Arrival, ChannelState, FrameId, FrameKind, InFlight, Medium, NodeId, Psdu, Reception,
    MIN_PSDU_BYTES,
};
pub use propagation::{
    dbm_to_mw, max_range, mw_to_dbm, noise_floor_dbm, path_loss_db, propagation_delay, rx_power_dbm, PathLossParams,
    RadioParams, THERMAL_NOISE_DBM_PER_HZ,
};
pub use rates::{
    data_symbols, frame_airtime, frame_airtime_us, response_rate, CodeRate, Modulation, RateId, PREAMBLE_AND_SIGNAL_US,
    SYMBOL_US,
};
