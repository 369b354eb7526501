//! Received power, SNR and packet error rate versus distance for each rate.
//!
//! ```text
//! cargo run --example link_budget -- analytic
//! ```

use dcf_sim::phy::{
    max_range, noise_floor_dbm, rx_power_dbm, ErrorModel, ErrorModelChoice, PathLossParams, RadioParams, RateId,
};

fn main() -> dcf_sim::Result<()> {
    let choice: ErrorModelChoice = std::env::args()
        .nth(1)
        .map(|s| s.parse().map_err(dcf_sim::SimError::InvalidParameter))
        .transpose()?
        .unwrap_or_default();
    let (radio, loss) = (RadioParams::default(), PathLossParams::default());
    let model = ErrorModel::new(choice);
    let noise = noise_floor_dbm(&radio);
    println!(
        "{choice} model, noise floor {noise:.2} dBm, range {:.2} m",
        max_range(&radio, &loss)
    );
    print!("{:>5} {:>8} {:>6}", "d_m", "rx_dBm", "snr");
    for r in RateId::ALL {
        print!(" {:>6}", format!("{}M", r.mbps()));
    }
    println!();
    for d in [1.0, 10.0, 20.0, 25.0, 28.0, 30.0, 35.0, 40.0, 45.0, 48.0, 50.0, 51.0] {
        let rx = rx_power_dbm(&radio, &loss, d)?;
        let snr = rx - noise;
        print!("{d:>5} {rx:>8.2} {snr:>6.2}");
        for r in RateId::ALL {
            print!(" {:>6.3}", model.per(snr, r, 86));
        }
        println!();
    }
    Ok(())
}
