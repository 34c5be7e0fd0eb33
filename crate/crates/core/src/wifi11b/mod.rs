//! 802.11b DSSS/CCK baseband: the transmit chain that feeds the
//! backscatter modulator and a reference receiver.
//!
//! ```
//! use backscatter_sim::wifi11b::{chips_to_iq, decode_packet, synthesize_packet, Rate, TxOptions};
//!
//! let (chips, _) = synthesize_packet(b"hello", Rate::R2, &TxOptions::advert()).unwrap();
//! let rx = chips_to_iq(&chips, 22e6).unwrap();
//! let pkt = decode_packet(&rx).unwrap();
//! assert!(pkt.crc_ok);
//! assert_eq!(pkt.payload, b"hello");
//! ```

mod cck;
mod dsss;
mod plcp;
mod rx;
mod scrambler;

pub use cck::{cck_decode, cck_encode, cck_encode_from};
pub use dsss::{barker_spread, barker_spread_from, BARKER};
pub use plcp::{
    advert_budget, advert_max_psdu, crc32, hec, length_field, plcp_overhead_s, psdu_len_from_field, synthesize_packet,
    PreambleMode, TxOptions, WifiPacket, ADVERT_WINDOW_S, FCS_LEN, MIN_MAC_FRAME,
};
pub use rx::{decode_packet, DecodedPacket};
pub use scrambler::{descramble_11b, scramble_11b, Descrambler, LONG_PREAMBLE_SEED, SHORT_PREAMBLE_SEED};

use crate::error::{Error, Result};
pub use crate::sigcore::WIFI_CHIP_RATE;
use crate::sigcore::{integer_ratio, IqBuffer, Sample};
use crate::ssbmod::{compose_waveform, FrequencyPlan, StateWaveform};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rate {
    R1,
    R2,
    R5_5,
    R11,
}

impl Rate {
    pub const ALL: [Rate; 4] = [Rate::R1, Rate::R2, Rate::R5_5, Rate::R11];

    pub fn mbps(self) -> f64 {
        match self {
            Rate::R1 => 1.0,
            Rate::R2 => 2.0,
            Rate::R5_5 => 5.5,
            Rate::R11 => 11.0,
        }
    }

    pub fn from_mbps(mbps: f64) -> Result<Self> {
        Rate::ALL.into_iter().find(|r| (r.mbps() - mbps).abs() < 1e-9).ok_or(Error::UnknownRate(mbps))
    }

    /// PLCP SIGNAL field: rate in units of 100 kbps.
    pub fn signal(self) -> u8 {
        (self.mbps() * 10.0).round() as u8
    }

    pub fn from_signal(signal: u8) -> Option<Self> {
        Rate::ALL.into_iter().find(|r| r.signal() == signal)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Mbps", self.mbps())
    }
}

/// Map an 11 Mchip/s chip stream onto backscatter states.
pub fn chips_to_backscatter(chips: &[Sample], plan: &FrequencyPlan) -> Result<StateWaveform> {
    compose_waveform(chips, WIFI_CHIP_RATE, plan)
}

/// Rectangular chips at `sample_rate` (an integer multiple of 11 MHz).
pub fn chips_to_iq(chips: &[Sample], sample_rate: f64) -> Result<IqBuffer> {
    let sps = integer_ratio(sample_rate, WIFI_CHIP_RATE)
        .ok_or_else(|| Error::SampleRateMismatch(format!("{sample_rate} Hz is not a multiple of 11 MHz")))?;
    let samples = chips.iter().flat_map(|&c| std::iter::repeat_n(c, sps)).collect();
    IqBuffer::new(samples, sample_rate, 0.0)
}
