//! Sweeps the SUT across the cell in all three configurations and prints a
//! compact table, using every available core.
//!
//! ```text
//! cargo run --release --example distance_sweep -- 500
//! ```

use dcf_sim::metrics::pearson;
use dcf_sim::scenario::{sweep, ConfigName, ScenarioConfig};

fn main() -> dcf_sim::Result<()> {
    let duration: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300.0);
    let positions: Vec<f64> = (0..=10).map(|k| if k == 0 { 1.0 } else { 5.0 * k as f64 }).collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    for name in ConfigName::ALL {
        let template = ScenarioConfig::new(name, 1.0).with_duration(duration);
        let points = sweep(&template, &positions, &[1], threads)?;
        println!("{name}");
        println!(
            "{:>5} {:>7} {:>9} {:>10} {:>6} {:>6} {:>7}",
            "d_m", "plr", "mu_d_us", "p999_us", "mu_a", "rate", "mu_P"
        );
        let (mut ds, mut as_) = (vec![], vec![]);
        for p in &points {
            let s = p
                .summary
                .as_ref()
                .map_err(|e| dcf_sim::SimError::InvalidScenario(e.clone()))?;
            let f = |v: Option<f64>| v.unwrap_or(f64::NAN);
            println!(
                "{:>5} {:>7.4} {:>9.1} {:>10.0} {:>6.3} {:>6} {:>7.3}",
                p.d_s,
                s.plr,
                f(s.mu_d_us),
                f(s.p999_us),
                f(s.mu_a),
                s.modal_rate().map_or(0, |r| r.mbps()),
                s.mu_p_uw()
            );
            if let (Some(d), Some(a)) = (s.mu_d_us, s.mu_a) {
                ds.push(d);
                as_.push(a);
            }
        }
        println!("pearson(mu_d, mu_a) = {:.3}\n", pearson(&ds, &as_)?);
    }
    Ok(())
}
