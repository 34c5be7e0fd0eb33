//! Complex-baseband simulator and codec library for inter-technology
//! backscatter: Bluetooth LE single-tone carriers, single-sideband
//! backscatter into 802.11b and 802.15.4 packets, an OFDM
//! amplitude-modulated downlink for envelope-detector receivers, and link
//! budget and MAC timing models.
//!
//! Start with the runnable programs under `examples/`; each one exercises
//! one capability end to end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ble;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod macproto;
pub mod ofdmlink;
pub mod sigcore;
pub mod ssbmod;
pub mod wifi11b;
pub mod zigbee;

pub use error::{Error, Result};
pub use sigcore::{IqBuffer, Sample, Spectrum};

/// Unpack bytes into bits, least-significant bit first (on-air order).
pub fn bytes_to_bits_lsb(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).map(move |i| (b >> i) & 1)).collect()
}

/// Pack bits (LSB first) into bytes; a trailing partial byte is zero-filled.
pub fn bits_to_bytes_lsb(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << i))).collect()
}
