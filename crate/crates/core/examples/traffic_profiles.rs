//! Packet arrivals of the periodic SUT source and the bursty interferer.

use dcf_sim::sim::{RngStream, SimTime};
use dcf_sim::traffic::{BurstyProfile, PeriodicProfile, TrafficProfile, TrafficSource};

fn summarize(label: &str, profile: TrafficProfile, horizon: SimTime) -> dcf_sim::Result<()> {
    let psdu = profile.psdu_bytes();
    let mut src = TrafficSource::new(profile, SimTime::from_secs(1))?;
    let mut rng = RngStream::new(1, 0);
    let mut first = vec![];
    while src.next_time() < horizon {
        let (pkt, _) = src.on_tick(src.next_time(), &mut rng);
        if first.len() < 5 {
            first.push(format!("{:.6}", pkt.gen_time.as_secs_f64()));
        }
    }
    let n = src.generated();
    let span = horizon.as_secs_f64() - 1.0;
    println!("{label}: {psdu} B frames, {n} packets in {span} s");
    println!(
        "  offered load {:.3} Mb/s, first arrivals {}",
        n as f64 * psdu as f64 * 8.0 / span / 1e6,
        first.join(" ")
    );
    Ok(())
}

fn main() -> dcf_sim::Result<()> {
    let horizon = SimTime::from_secs(61);
    summarize(
        "SUT periodic",
        TrafficProfile::Periodic(PeriodicProfile::default()),
        horizon,
    )?;
    summarize("INT bursty", TrafficProfile::Bursty(BurstyProfile::default()), horizon)?;

    let mut rng = RngStream::new(2, 0);
    let profile = BurstyProfile::default();
    let mut t = SimTime::from_secs(1);
    println!("first bursts:");
    for _ in 0..5 {
        let b = profile.draw_burst(t, &mut rng)?;
        println!(
            "  start {:.6} s, {} packets, idle {:.3} ms",
            b.start.as_secs_f64(),
            b.count,
            b.idle_after.as_secs_f64() * 1e3
        );
        t = b.next_start();
    }
    Ok(())
}
