//! The 802.11a OFDM rate set and frame airtime.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sim::SimTime;

/// Legacy preamble (16 us) plus the SIGNAL symbol (4 us).
pub const PREAMBLE_AND_SIGNAL_US: u64 = 20;
pub const SYMBOL_US: u64 = 4;
pub const SERVICE_BITS: u64 = 16;
pub const TAIL_BITS: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

/// Convolutional code rate as numerator/denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeRate {
    Half,
    TwoThirds,
    ThreeQuarters,
}

/// One of the eight 802.11a data rates, ordered slowest to fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RateId {
    R6,
    R9,
    R12,
    R18,
    R24,
    R36,
    R48,
    R54,
}

impl RateId {
    pub const ALL: [RateId; 8] = [
        RateId::R6,
        RateId::R9,
        RateId::R12,
        RateId::R18,
        RateId::R24,
        RateId::R36,
        RateId::R48,
        RateId::R54,
    ];

    pub const LOWEST: RateId = RateId::R6;
    pub const HIGHEST: RateId = RateId::R54;

    /// Position in [`RateId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<RateId> {
        Self::ALL.get(i).copied()
    }

    pub fn from_mbps(mbps: u32) -> Option<RateId> {
        Self::ALL.iter().copied().find(|r| r.mbps() == mbps)
    }

    pub fn mbps(self) -> u32 {
        match self {
            RateId::R6 => 6,
            RateId::R9 => 9,
            RateId::R12 => 12,
            RateId::R18 => 18,
            RateId::R24 => 24,
            RateId::R36 => 36,
            RateId::R48 => 48,
            RateId::R54 => 54,
        }
    }

    pub fn data_bits_per_symbol(self) -> u64 {
        u64::from(self.mbps()) * SYMBOL_US
    }

    pub fn modulation(self) -> Modulation {
        match self {
            RateId::R6 | RateId::R9 => Modulation::Bpsk,
            RateId::R12 | RateId::R18 => Modulation::Qpsk,
            RateId::R24 | RateId::R36 => Modulation::Qam16,
            RateId::R48 | RateId::R54 => Modulation::Qam64,
        }
    }

    pub fn code_rate(self) -> CodeRate {
        match self {
            RateId::R6 | RateId::R12 | RateId::R24 => CodeRate::Half,
            RateId::R48 => CodeRate::TwoThirds,
            RateId::R9 | RateId::R18 | RateId::R36 | RateId::R54 => CodeRate::ThreeQuarters,
        }
    }
}

impl fmt::Display for RateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Mb/s", self.mbps())
    }
}

/// Number of OFDM data symbols needed for a PSDU.
pub fn data_symbols(psdu_bytes: u32, rate: RateId) -> u64 {
    let bits = SERVICE_BITS + 8 * u64::from(psdu_bytes) + TAIL_BITS;
    bits.div_ceil(rate.data_bits_per_symbol())
}

/// On-air duration of a PSDU including preamble and SIGNAL, in microseconds.
pub fn frame_airtime_us(psdu_bytes: u32, rate: RateId) -> u64 {
    PREAMBLE_AND_SIGNAL_US + SYMBOL_US * data_symbols(psdu_bytes, rate)
}

pub fn frame_airtime(psdu_bytes: u32, rate: RateId) -> SimTime {
    SimTime::from_micros(frame_airtime_us(psdu_bytes, rate))
}

/// Control response rate: the highest basic rate not faster than the
/// eliciting frame's rate, or the slowest basic rate if none qualifies.
pub fn response_rate(data_rate: RateId, basic_rates: &[RateId]) -> RateId {
    basic_rates
        .iter()
        .copied()
        .filter(|r| *r <= data_rate)
        .max()
        .or_else(|| basic_rates.iter().copied().min())
        .unwrap_or(RateId::LOWEST)
}
