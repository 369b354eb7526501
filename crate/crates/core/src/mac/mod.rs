//! IEEE 802.11 DCF: carrier-sense deferral, slotted binary exponential
//! backoff, ACK handling and retransmission up to the retry limit.

mod dcf;
mod params;

pub use dcf::{AttemptOutcome, Completion, Dcf, MacFrame, Phase, TxAttempt, TxFinish, TxState};
pub use params::{backoff_draw, next_cw, MacParams, ACK_BYTES};
