//! Runs one simulation point and prints its metrics.
//!
//! ```text
//! cargo run --release --example single_point -- HIDDEN 20 500
//! ```
//! Arguments: configuration name, SUT distance in metres, duration in seconds.

use dcf_sim::phy::RateId;
use dcf_sim::scenario::{ConfigName, ScenarioConfig};

fn main() -> dcf_sim::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name: ConfigName = args
        .first()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(ConfigName::NoInt);
    let d_s: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let duration: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(300.0);

    let started = std::time::Instant::now();
    let result = ScenarioConfig::new(name, d_s).with_duration(duration).run()?;
    let s = &result.summary;
    println!(
        "{name} d_s={d_s} m, {duration} s simulated in {:.2?}",
        started.elapsed()
    );
    println!(
        "packets {} acked {} dropped {} (PLR {:.4})",
        s.packets, s.acked, s.dropped, s.plr
    );
    let us = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.1}"));
    println!(
        "latency us: mean {} min {} p99 {} p99.9 {}",
        us(s.mu_d_us),
        us(s.d_min_us),
        us(s.p99_us),
        us(s.p999_us)
    );
    println!(
        "attempts/packet {:.3}  mean rate {:.1} Mb/s  power {:.3} uW",
        s.mu_a.unwrap_or(f64::NAN),
        s.mu_r_mbps.unwrap_or(f64::NAN),
        s.mu_p_uw()
    );
    for r in RateId::ALL {
        let i = r.index();
        if s.f_r[i] > 0 {
            println!(
                "  {:>2} Mb/s: {:>7} attempts, success {:.3}",
                r.mbps(),
                s.f_r[i],
                s.s_r()[i].unwrap()
            );
        }
    }
    println!("events dispatched: {}", result.output.events);
    Ok(())
}
