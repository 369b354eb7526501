//! Frame airtimes and ACK response rates for common frame sizes.

use dcf_sim::mac::{MacParams, ACK_BYTES};
use dcf_sim::minstrel::perfect_transaction_us;
use dcf_sim::phy::{data_symbols, frame_airtime_us, response_rate, RateId};

fn main() {
    let mac = MacParams::default();
    println!(
        "{:>5} {:>8} {:>8} {:>9} {:>6} {:>8}",
        "rate", "symbols", "86B_us", "1500B_us", "ack", "txn_us"
    );
    for r in RateId::ALL {
        let ack = response_rate(r, &mac.basic_rates);
        println!(
            "{:>5} {:>8} {:>8} {:>9} {:>6} {:>8}",
            r.mbps(),
            data_symbols(86, r),
            frame_airtime_us(86, r),
            frame_airtime_us(1500, r),
            format!("{}:{}", ack.mbps(), frame_airtime_us(ACK_BYTES, ack)),
            perfect_transaction_us(r, 86, &mac),
        );
    }
}
