//! Turn a Bluetooth advertising packet into a single tone.
//!
//! The payload and advertiser address are chosen so that, after whitening,
//! every bit between the header and the CRC has the same value. GFSK then
//! holds the carrier at +250 kHz (or -250 kHz) for almost 300 µs.

use backscatter_sim::ble::{single_tone_payload, BleChannel, Polarity, MAX_ADV_PAYLOAD};
use backscatter_sim::experiments::chain::tone_advert;
use backscatter_sim::sigcore::periodogram;

fn main() -> backscatter_sim::Result<()> {
    for channel in BleChannel::advertising() {
        for polarity in [Polarity::Ones, Polarity::Zeros] {
            let payload = single_tone_payload(channel, polarity, MAX_ADV_PAYLOAD)?;
            let advert = tone_advert(channel, polarity, 8e6)?;
            let s = periodogram(&advert.tone_segment(), 2048)?;
            let f0 = polarity.tone_offset();
            println!(
                "ch{} {:?}: payload {}.. tone {:+.0} kHz, {:.2}% of power within ±100 kHz, {:.0} µs usable",
                channel.index(),
                polarity,
                payload.iter().take(6).map(|b| format!("{b:02x}")).collect::<String>(),
                s.peak_freq() / 1e3,
                100.0 * s.band_fraction(f0 - 100e3, f0 + 100e3),
                advert.usable_tone_s() * 1e6,
            );
        }
    }
    Ok(())
}
