//! Write a capture to disk as interleaved f32 with a metadata sidecar,
//! read it back and take its spectrum.

use backscatter_sim::ble::{BleChannel, Polarity};
use backscatter_sim::experiments::chain::tone_advert;
use backscatter_sim::sigcore::{periodogram, read_iq, sidecar_path, write_iq};

fn main() -> backscatter_sim::Result<()> {
    let advert = tone_advert(BleChannel::new(37)?, Polarity::Zeros, 8e6)?;
    let path = std::env::temp_dir().join("bsim_example_tone.iq");
    write_iq(&path, &advert.iq, "iq_files example")?;
    println!("{}", std::fs::read_to_string(sidecar_path(&path))?);

    let (back, meta) = read_iq(&path)?;
    let s = periodogram(&back, 1024)?;
    println!(
        "{} samples at {} Msps from {:?}; peak {:+.0} kHz",
        back.len(),
        meta.sample_rate_hz / 1e6,
        meta.created_by,
        s.peak_freq() / 1e3
    );
    Ok(())
}
