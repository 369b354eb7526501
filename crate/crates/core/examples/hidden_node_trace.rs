//! Shows hidden-node collisions at the AP: SUT data frames that overlap an
//! interferer transmission, and how many of them were lost.
//!
//! ```text
//! cargo run --release --example hidden_node_trace -- 30
//! ```

use dcf_sim::network::Simulation;
use dcf_sim::phy::FrameKind;
use dcf_sim::scenario::{ConfigName, ScenarioConfig, INT, SUT};

fn main() -> dcf_sim::Result<()> {
    let d_s: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30.0);
    for name in [ConfigName::Visible, ConfigName::Hidden] {
        let cfg = ScenarioConfig::new(name, d_s).with_duration(60.0);
        let sim = Simulation::new(cfg.setup(true)?)?;
        let heard = sim.medium().can_detect(INT, SUT);
        let out = sim.run();
        let trace = out.trace.unwrap_or_default();
        let data = |n| trace.iter().filter(move |e| e.node == n && e.kind == FrameKind::Data);
        let int_frames: Vec<_> = data(INT).collect();
        let (mut sut_frames, mut overlapping) = (0, 0);
        for f in data(SUT) {
            sut_frames += 1;
            if int_frames.iter().any(|i| i.start < f.end && f.start < i.end) {
                overlapping += 1;
            }
        }
        let c = &out.counters[SUT];
        println!(
            "{name} at {d_s} m: SUT hears INT: {heard}; {sut_frames} SUT data frames, {overlapping} overlap INT, \
             {} acked, {} dropped",
            c.acked, c.dropped
        );
    }
    Ok(())
}
