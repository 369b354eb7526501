//! Minstrel against a synthetic channel where rates up to a cutoff always
//! succeed and faster ones always fail. Prints the attempt share per rate
//! over successive update intervals.
//!
//! ```text
//! cargo run --example minstrel_oracle -- 24
//! ```

use dcf_sim::mac::MacParams;
use dcf_sim::minstrel::{Minstrel, MinstrelParams};
use dcf_sim::phy::RateId;
use dcf_sim::sim::RngStream;

fn main() {
    let cutoff = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .and_then(RateId::from_mbps)
        .unwrap_or(RateId::R24);
    let mac = MacParams::default();
    let mut m = Minstrel::new(MinstrelParams::default(), mac.clone(), 86);
    let mut rng = RngStream::new(1, 0);
    println!("channel passes rates <= {} Mb/s", cutoff.mbps());
    for interval in 0..12 {
        let mut counts = [0u64; 8];
        for _ in 0..200 {
            for k in 0..mac.max_attempts() {
                let r = m.select_rate(k, &mut rng);
                counts[r.index()] += 1;
                let ok = r <= cutoff;
                m.record_outcome(r, ok);
                if ok {
                    break;
                }
            }
        }
        m.update_stats();
        let total: u64 = counts.iter().sum();
        let shares: Vec<String> = RateId::ALL
            .iter()
            .filter(|r| counts[r.index()] > 0)
            .map(|r| format!("{}:{:.0}%", r.mbps(), 100.0 * counts[r.index()] as f64 / total as f64))
            .collect();
        println!(
            "interval {interval:>2}  best {:>2}  second {:>2}  prob {:>2}  [{}]",
            m.best_throughput_rate().mbps(),
            m.second_throughput_rate().mbps(),
            m.best_probability_rate().mbps(),
            shares.join(" ")
        );
    }
}
