//! Downlink to an envelope detector. Each bit becomes a pair of 802.11g
//! OFDM symbols: random then random for 0, random then constant for 1. The
//! constant symbol piles its energy into one sample and is quiet
//! otherwise, which a peak detector sees as a low level.

use backscatter_sim::channel::{awgn_per_symbol, trial_rng};
use backscatter_sim::ofdmlink::{
    build_downlink, envelope_decode, first_sample_fraction, EnvelopeConfig, OfdmConfig, SymbolTag,
};

fn main() -> backscatter_sim::Result<()> {
    let cfg = OfdmConfig::default();
    let message = b"ping";
    let bits: Vec<u8> = message.iter().flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1)).collect();
    let mut rng = trial_rng(11, 0);
    let frame = build_downlink(&bits, 0x5d, &cfg, &mut rng)?;

    println!(
        "{} bits -> {} symbols, {:.0} µs, {:.0} kbps",
        bits.len(),
        frame.plan.len(),
        frame.iq.duration() * 1e6,
        cfg.downlink_bit_rate() / 1e3
    );
    let line: String = frame
        .symbols()
        .zip(&frame.plan.tags)
        .take(24)
        .map(|(s, t)| match t {
            SymbolTag::Constant => format!("C{:.2} ", first_sample_fraction(s)),
            SymbolTag::Random => format!("r{:.2} ", first_sample_fraction(s)),
        })
        .collect();
    println!("first-sample energy: {line}...");

    let rx = awgn_per_symbol(&frame.iq.padded(100, 100), 6.0, 1, &mut rng)?;
    let d = envelope_decode(&rx, &EnvelopeConfig::default(), Some(bits.len()))?;
    let text: Vec<u8> = d.bits.chunks(8).map(|c| c.iter().fold(0, |a, &b| (a << 1) | b)).collect();
    println!("decoded at 6 dB: {:?} (levels {:.3} / {:.3})", String::from_utf8_lossy(&text), d.high_level, d.low_level);
    Ok(())
}
