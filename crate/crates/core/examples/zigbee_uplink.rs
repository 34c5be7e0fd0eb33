//! 802.15.4 from a Bluetooth tone: channel 38 (2426 MHz) moved down 6 MHz
//! onto ZigBee channel 14 (2420 MHz). The 250 kHz tone offset survives as
//! a carrier offset the receiver removes.

use backscatter_sim::ble::{BleChannel, Polarity};
use backscatter_sim::channel::{awgn_per_symbol, trial_rng};
use backscatter_sim::experiments::chain::{zigbee_front_end, zigbee_uplink};
use backscatter_sim::ssbmod::DEFAULT_ETA;
use backscatter_sim::zigbee::{plan_for_channel, zigbee_decode};

fn main() -> backscatter_sim::Result<()> {
    let ble = BleChannel::new(38)?;
    let plan = plan_for_channel(Polarity::Ones.tone_freq(ble), 14)?;
    println!("shift {:+.1} MHz, state clock {:.0} MHz", plan.delta_f / 1e6, plan.master_clock / 1e6);

    let up = zigbee_uplink(ble, Polarity::Ones, 14, b"sensor reading 42", DEFAULT_ETA)?;
    let clean = zigbee_front_end(&up.reflected, up.rx_offset_hz)?;
    for snr in [-4.0, 0.0, 10.0] {
        let rx = awgn_per_symbol(&clean, snr, 4, &mut trial_rng(3, 0))?;
        match zigbee_decode(&rx) {
            Ok(d) => println!("{snr:>5} dB  {}", d.to_json_line()),
            Err(e) => println!("{snr:>5} dB  lost: {e}"),
        }
    }
    Ok(())
}
