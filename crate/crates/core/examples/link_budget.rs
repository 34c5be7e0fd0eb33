//! Received backscatter power and SNR as the receiver walks away from the
//! tag, with the Bluetooth source 30 cm from the tag.

use backscatter_sim::channel::{rx_power, LinkBudget};

fn main() -> backscatter_sim::Result<()> {
    println!("{:>6} {:>10} {:>10} {:>8}", "d2 m", "tag dBm", "rx dBm", "snr dB");
    for d2 in [1.0, 2.0, 5.0, 10.0, 20.0, 30.0] {
        let b = LinkBudget { d2_m: d2, ..LinkBudget::default() };
        let p = rx_power(&b)?;
        println!("{d2:>6.1} {:>10.1} {:>10.1} {:>8.1}", p.at_tag_dbm, p.at_receiver_dbm, p.snr_db);
    }
    Ok(())
}
