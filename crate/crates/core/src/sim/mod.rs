//! Deterministic discrete-event engine: the virtual clock, the event queue,
//! and seeded per-node random streams.

mod queue;
mod rng;
mod time;

pub use queue::{Event, EventHandle, Scheduler};
pub use rng::{RngStream, StreamPurpose};
pub use time::SimTime;
