use super::cck::cck_encode_from;
use super::dsss::barker_spread_from;
use super::scrambler::{scramble_11b, LONG_PREAMBLE_SEED, SHORT_PREAMBLE_SEED};
use super::Rate;
use crate::bytes_to_bits_lsb;
use crate::error::{Error, Result};
use crate::sigcore::Sample;

/// Advertising payload airtime available to one synthesized packet.
pub const ADVERT_WINDOW_S: f64 = 248e-6;
/// Smallest useful MAC frame (an ACK: frame control, duration, RA, FCS).
pub const MIN_MAC_FRAME: usize = 14;
pub const FCS_LEN: usize = 4;

pub const LONG_SFD: u16 = 0xF3A0;
pub const SHORT_SFD: u16 = 0x05CF;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreambleMode {
    Long,
    Short,
    /// Short when the advert budget applies, long otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxOptions {
    pub preamble: PreambleMode,
    pub advert_constrained: bool,
    /// Scrambler seed; the preamble-specific default when `None`.
    pub seed: Option<u8>,
}

impl Default for TxOptions {
    fn default() -> Self {
        Self { preamble: PreambleMode::Auto, advert_constrained: false, seed: None }
    }
}

impl TxOptions {
    pub fn advert() -> Self {
        Self { advert_constrained: true, ..Self::default() }
    }
}

/// Preamble + header airtime.
pub fn plcp_overhead_s(short: bool) -> f64 {
    if short {
        96e-6
    } else {
        192e-6
    }
}

/// Largest PSDU (MAC frame including FCS) whose packet fits the advert window.
pub fn advert_max_psdu(rate: Rate, short: bool) -> usize {
    let avail = ADVERT_WINDOW_S - plcp_overhead_s(short);
    ((avail * rate.mbps() * 1e6 / 8.0) + 1e-9).floor() as usize
}

/// Advert-budget PSDU limit at `rate`, with the preamble chosen to fit.
pub fn advert_budget(rate: Rate) -> Result<usize> {
    match rate {
        Rate::R1 => {
            debug_assert!(advert_max_psdu(Rate::R1, false) < MIN_MAC_FRAME);
            Err(Error::OneMbpsDoesNotFit)
        }
        r => Ok(advert_max_psdu(r, true)),
    }
}

/// CRC-32 (IEEE 802.3), reflected, as used for the FCS.
pub fn crc32(bytes: &[u8]) -> u32 {
    let mut reg = 0xFFFF_FFFFu32;
    for &b in bytes {
        reg ^= b as u32;
        for _ in 0..8 {
            reg = if reg & 1 == 1 { (reg >> 1) ^ 0xEDB8_8320 } else { reg >> 1 };
        }
    }
    !reg
}

/// PLCP header check: CRC-16 (x^16+x^12+x^5+1) over the on-air header bits,
/// preset to ones, ones-complemented.
pub fn hec(signal: u8, service: u8, length: u16) -> u16 {
    let bytes = [signal, service, length as u8, (length >> 8) as u8];
    let mut reg = 0xFFFFu16;
    for b in bytes_to_bits_lsb(&bytes) {
        let fb = ((reg >> 15) as u8 & 1) ^ b;
        reg <<= 1;
        if fb == 1 {
            reg ^= 0x1021;
        }
    }
    !reg
}

/// LENGTH field (microseconds) and the length-extension bit for `psdu` bytes.
pub fn length_field(rate: Rate, psdu: usize) -> (u16, bool) {
    let bits = psdu * 8;
    match rate {
        Rate::R1 => (bits as u16, false),
        Rate::R2 => ((bits / 2) as u16, false),
        Rate::R5_5 => ((bits * 2).div_ceil(11) as u16, false),
        Rate::R11 => {
            let us = bits.div_ceil(11);
            (us as u16, us * 11 - bits >= 8)
        }
    }
}

/// PSDU byte count implied by a LENGTH field.
pub fn psdu_len_from_field(rate: Rate, length_us: u16, ext: bool) -> usize {
    let us = length_us as usize;
    match rate {
        Rate::R1 => us / 8,
        Rate::R2 => us / 4,
        Rate::R5_5 => us * 11 / 16,
        Rate::R11 => us * 11 / 8 - ext as usize,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WifiPacket {
    pub rate: Rate,
    pub short_preamble: bool,
    pub signal: u8,
    pub service: u8,
    /// LENGTH field in microseconds.
    pub length: u16,
    pub hec: u16,
    pub payload: Vec<u8>,
    pub fcs: u32,
    pub seed: u8,
}

impl WifiPacket {
    pub fn psdu(&self) -> Vec<u8> {
        let mut p = self.payload.clone();
        p.extend_from_slice(&self.fcs.to_le_bytes());
        p
    }

    pub fn psdu_len(&self) -> usize {
        self.payload.len() + FCS_LEN
    }

    pub fn airtime_s(&self) -> f64 {
        plcp_overhead_s(self.short_preamble) + (self.psdu_len() * 8) as f64 / (self.rate.mbps() * 1e6)
    }

    pub fn header_bits(&self) -> Vec<u8> {
        let mut bits = bytes_to_bits_lsb(&[self.signal, self.service]);
        bits.extend(bytes_to_bits_lsb(&self.length.to_le_bytes()));
        bits.extend((0..16).rev().map(|i| ((self.hec >> i) & 1) as u8));
        bits
    }

    /// Unscrambled PPDU bits: SYNC, SFD, header, PSDU.
    pub fn ppdu_bits(&self) -> Vec<u8> {
        let (sync, sfd) = if self.short_preamble { (vec![0u8; 56], SHORT_SFD) } else { (vec![1u8; 128], LONG_SFD) };
        let mut bits = sync;
        bits.extend(bytes_to_bits_lsb(&sfd.to_le_bytes()));
        bits.extend(self.header_bits());
        bits.extend(bytes_to_bits_lsb(&self.psdu()));
        bits
    }

    pub fn to_hex(&self) -> String {
        self.psdu().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Build an 802.11b packet and its 11 Mchip/s chip stream.
pub fn synthesize_packet(payload: &[u8], rate: Rate, opts: &TxOptions) -> Result<(Vec<Sample>, WifiPacket)> {
    let short = match opts.preamble {
        PreambleMode::Long => false,
        PreambleMode::Short => true,
        PreambleMode::Auto => opts.advert_constrained && rate != Rate::R1,
    };
    if short && rate == Rate::R1 {
        return Err(Error::InvalidParameter("the short preamble does not support 1 Mbps".into()));
    }
    let psdu_len = payload.len() + FCS_LEN;
    if opts.advert_constrained {
        if rate == Rate::R1 {
            return Err(Error::OneMbpsDoesNotFit);
        }
        let max_psdu = advert_max_psdu(rate, short);
        if psdu_len > max_psdu {
            return Err(Error::BudgetExceeded {
                rate: rate.mbps(),
                psdu: psdu_len,
                max_psdu,
                max_payload: max_psdu.saturating_sub(FCS_LEN),
            });
        }
    }
    let (length, ext) = length_field(rate, psdu_len);
    if psdu_len_from_field(rate, length, ext) != psdu_len || psdu_len > 4095 {
        return Err(Error::PayloadTooLarge { len: payload.len(), max: 4095 - FCS_LEN });
    }
    let signal = rate.signal();
    let service = 0x04 | if ext { 0x80 } else { 0 };
    let seed = opts.seed.unwrap_or(if short { SHORT_PREAMBLE_SEED } else { LONG_PREAMBLE_SEED });
    let packet = WifiPacket {
        rate,
        short_preamble: short,
        signal,
        service,
        length,
        hec: hec(signal, service, length),
        payload: payload.to_vec(),
        fcs: crc32(payload),
        seed,
    };

    let scrambled = scramble_11b(&packet.ppdu_bits(), seed)?;
    let pre_len = if short { 72 } else { 144 };
    let hdr_end = pre_len + 48;
    let mut phase = 0u8;
    let mut chips = barker_spread_from(&scrambled[..pre_len], Rate::R1, &mut phase)?;
    let hdr_rate = if short { Rate::R2 } else { Rate::R1 };
    chips.extend(barker_spread_from(&scrambled[pre_len..hdr_end], hdr_rate, &mut phase)?);
    let body = &scrambled[hdr_end..];
    match rate {
        Rate::R1 | Rate::R2 => chips.extend(barker_spread_from(body, rate, &mut phase)?),
        Rate::R5_5 | Rate::R11 => chips.extend(cck_encode_from(body, rate, &mut phase, 0)?),
    }
    Ok((chips, packet))
}
