//! Bluetooth LE advertising transmitter model.
//!
//! The backscatter tag never decodes BLE; it only needs the advertiser to emit
//! a long constant-frequency stretch. [`single_tone_payload`] picks payload
//! bytes that whiten to all zeros or all ones, and [`gfsk_modulate`] turns the
//! on-air bits into the resulting near-pure tone.

mod detect;
mod gfsk;
mod packet;
mod whitening;

pub use detect::{detect_packet_start, Detection, GUARD_S, PAYLOAD_OFFSET_S};
pub use gfsk::{gfsk_modulate, gfsk_modulate_with, GfskConfig};
pub use packet::{
    bits_from_text, bits_to_text, build_advertising_packet, build_with_address, crc24, parse_advertising_packet,
    single_tone_adv_address, single_tone_payload, BleConfig, BlePacket, ParsedPacket, PAYLOAD_WHITENING_OFFSET,
    PDU_ADV_NONCONN_IND,
};
pub use whitening::{whitening_sequence, Whitener};

use crate::error::{Error, Result};

pub const BLE_BIT_RATE: f64 = 1e6;
pub const ADV_ACCESS_ADDRESS: u32 = 0x8E89_BED6;
pub const MAX_ADV_PAYLOAD: usize = 31;
pub const FREQ_DEVIATION_HZ: f64 = 250e3;

/// An RF channel index 0..=39 (37, 38, 39 are the advertising channels).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BleChannel(u8);

impl BleChannel {
    pub fn new(index: u32) -> Result<Self> {
        if index > 39 {
            return Err(Error::BadChannel(index));
        }
        Ok(Self(index as u8))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn is_advertising(self) -> bool {
        self.0 >= 37
    }

    pub fn center_freq(self) -> f64 {
        let mhz = match self.0 {
            37 => 2402,
            38 => 2426,
            39 => 2480,
            k @ 0..=10 => 2404 + 2 * k as u32,
            k => 2428 + 2 * (k as u32 - 11),
        };
        mhz as f64 * 1e6
    }

    pub fn advertising() -> [BleChannel; 3] {
        [BleChannel(37), BleChannel(38), BleChannel(39)]
    }
}

/// Which constant bit value the whitened payload carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Zeros,
    Ones,
}

impl Polarity {
    /// Baseband frequency of the resulting tone.
    pub fn tone_offset(self) -> f64 {
        match self {
            Polarity::Ones => FREQ_DEVIATION_HZ,
            Polarity::Zeros => -FREQ_DEVIATION_HZ,
        }
    }

    /// RF frequency of the tone on `channel`.
    pub fn tone_freq(self, channel: BleChannel) -> f64 {
        channel.center_freq() + self.tone_offset()
    }
}

impl std::str::FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zeros" | "0" => Ok(Polarity::Zeros),
            "ones" | "1" => Ok(Polarity::Ones),
            _ => Err(Error::Parse(format!("polarity must be zeros or ones, got {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn advertising_centres() {
        let f: Vec<f64> = BleChannel::advertising().iter().map(|c| c.center_freq()).collect();
        assert_eq!(f, vec![2402e6, 2426e6, 2480e6]);
    }

    #[test]
    fn data_channels_skip_advertising_slots() {
        let mut all: Vec<f64> = (0..40).map(|k| BleChannel::new(k).unwrap().center_freq()).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect: Vec<f64> = (0..40).map(|i| 2402e6 + 2e6 * i as f64).collect();
        assert_eq!(all, expect);
    }

    #[test]
    fn channel_range_checked() {
        assert!(BleChannel::new(39).is_ok());
        assert_eq!(BleChannel::new(40), Err(Error::BadChannel(40)));
    }
}
