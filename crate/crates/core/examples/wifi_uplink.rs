//! Full uplink: a single-tone advert on BLE channel 38 is shifted by
//! 35.75 MHz onto Wi-Fi channel 11 and carries an 802.11b packet, which a
//! reference receiver decodes at several SNRs.

use backscatter_sim::ble::{BleChannel, Polarity};
use backscatter_sim::channel::{awgn_per_symbol, trial_rng};
use backscatter_sim::experiments::chain::{tone_advert, wifi_front_end, wifi_uplink, UPLINK_RATE};
use backscatter_sim::ssbmod::{FrequencyPlan, DEFAULT_ETA};
use backscatter_sim::wifi11b::{decode_packet, Rate, TxOptions};

fn main() -> backscatter_sim::Result<()> {
    let advert = tone_advert(BleChannel::new(38)?, Polarity::Ones, UPLINK_RATE)?;
    let payload = b"hello from a backscatter tag";
    for rate in [Rate::R2, Rate::R5_5, Rate::R11] {
        let up = wifi_uplink(&advert, payload, rate, &TxOptions::advert(), &FrequencyPlan::default(), DEFAULT_ETA)?;
        let clean = wifi_front_end(&up.reflected, up.rx_offset_hz)?;
        println!(
            "{} Mbps, {:.1} µs on air, received at {:.3} GHz",
            rate.mbps(),
            up.packet.airtime_s() * 1e6,
            clean.center_freq / 1e9
        );
        for snr in [4.0, 8.0, 20.0] {
            let rx = awgn_per_symbol(&clean, snr, 4, &mut trial_rng(7, snr as u64))?;
            match decode_packet(&rx) {
                Ok(d) => println!("  {snr:>4} dB  {}", d.to_json_line()),
                Err(e) => println!("  {snr:>4} dB  lost: {e}"),
            }
        }
    }
    Ok(())
}
