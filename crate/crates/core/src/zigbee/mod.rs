//! 802.15.4 (2.4 GHz O-QPSK) synthesis on the backscatter state grid, with a
//! noncoherent chip-correlation receiver.

use crate::error::{Error, Result};
use crate::sigcore::{integer_ratio, mean_power, to_db, IqBuffer, Sample};
use crate::ssbmod::{compose_waveform, FrequencyPlan, StateWaveform};
use crate::{bits_to_bytes_lsb, bytes_to_bits_lsb};
use serde::Serialize;
use std::f64::consts::PI;

pub const CHIP_RATE: f64 = 2e6;
pub const SFD: u8 = 0xA7;
pub const PREAMBLE_BYTES: usize = 4;
pub const MAX_PSDU: usize = 127;
pub const FCS_LEN: usize = 2;
pub const MAX_PAYLOAD: usize = MAX_PSDU - FCS_LEN;

const BASE_SEQUENCE: u32 = 0b1101_1001_1100_0011_0101_0010_0010_1110;

/// Chip sequence of `symbol` (first chip at index 0).
///
/// Symbols 1..=7 are the base sequence rotated right by four chips per step;
/// symbols 8..=15 repeat them with every odd-indexed chip inverted.
pub fn chip_sequence(symbol: u8) -> [u8; 32] {
    let k = (symbol & 7) as u32;
    let rotated = BASE_SEQUENCE.rotate_right(4 * k);
    let mut chips = [0u8; 32];
    for (i, c) in chips.iter_mut().enumerate() {
        *c = ((rotated >> (31 - i)) & 1) as u8;
        if symbol >= 8 && i % 2 == 1 {
            *c ^= 1;
        }
    }
    chips
}

/// Centre frequency of channel 11..=26.
pub fn channel_freq(channel: u32) -> Result<f64> {
    if !(11..=26).contains(&channel) {
        return Err(Error::InvalidParameter(format!("802.15.4 channel {channel} outside 11-26")));
    }
    Ok((2405.0 + 5.0 * (channel as f64 - 11.0)) * 1e6)
}

/// CRC-16 with polynomial x^16+x^12+x^5+1, LSB-first, zero preset.
pub fn fcs16(bytes: &[u8]) -> u16 {
    let mut reg = 0u16;
    for &b in bytes {
        reg ^= b as u16;
        for _ in 0..8 {
            reg = if reg & 1 == 1 { (reg >> 1) ^ 0x8408 } else { reg >> 1 };
        }
    }
    reg
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigbeePacket {
    pub payload: Vec<u8>,
    pub fcs: u16,
}

impl ZigbeePacket {
    pub fn new(payload: &[u8]) -> Result<Self> {
        if payload.len() > MAX_PAYLOAD {
            return Err(Error::PayloadTooLarge { len: payload.len(), max: MAX_PAYLOAD });
        }
        Ok(Self { payload: payload.to_vec(), fcs: fcs16(payload) })
    }

    pub fn length(&self) -> u8 {
        (self.payload.len() + FCS_LEN) as u8
    }

    /// Preamble, SFD, length, payload, FCS.
    pub fn ppdu(&self) -> Vec<u8> {
        let mut b = vec![0u8; PREAMBLE_BYTES];
        b.push(SFD);
        b.push(self.length());
        b.extend_from_slice(&self.payload);
        b.extend_from_slice(&self.fcs.to_le_bytes());
        b
    }

    /// 4-bit data symbols, low nibble of each byte first.
    pub fn symbols(&self) -> Vec<u8> {
        self.ppdu().iter().flat_map(|b| [b & 0x0f, b >> 4]).collect()
    }

    pub fn airtime_s(&self) -> f64 {
        self.ppdu().len() as f64 * 8.0 / 250e3
    }
}

/// Chips of a symbol sequence at 2 Mchip/s.
pub fn spread(symbols: &[u8]) -> Vec<u8> {
    symbols.iter().flat_map(|&s| chip_sequence(s)).collect()
}

/// O-QPSK baseband with one value per 0.5 µs chip period.
///
/// Even chips drive I for two slots starting on even slots; odd chips drive
/// Q for two slots starting on odd slots, so I and Q never switch together.
/// Values lie on `±1±j`.
pub fn oqpsk(chips: &[u8]) -> Vec<Sample> {
    let pm = |c: u8| if c == 1 { 1.0 } else { -1.0 };
    let n = chips.len() & !1;
    (0..n)
        .map(|k| {
            let i = chips[2 * (k / 2)];
            let q = if k == 0 { chips[1] } else { chips[2 * k.div_ceil(2) - 1] };
            Sample::new(pm(i), pm(q))
        })
        .collect()
}

/// Build the packet, its O-QPSK slot stream, and the backscatter states for
/// a plan with a 2 MHz symbol clock.
pub fn zigbee_synthesize(payload: &[u8], plan: &FrequencyPlan) -> Result<(Vec<Sample>, StateWaveform, ZigbeePacket)> {
    let pkt = ZigbeePacket::new(payload)?;
    let stream = oqpsk(&spread(&pkt.symbols()));
    let wf = compose_waveform(&stream, CHIP_RATE, plan)?;
    Ok((stream, wf, pkt))
}

/// Shift plan placing a tone at `tone_freq` onto 802.15.4 `channel`.
pub fn plan_for_channel(tone_freq: f64, channel: u32) -> Result<FrequencyPlan> {
    let target = channel_freq(channel)?;
    let df = ((target - tone_freq) / 1e6).round() * 1e6;
    FrequencyPlan::new(df, CHIP_RATE)
}

/// Rectangular chip periods at `sample_rate` (an integer multiple of 2 MHz).
pub fn stream_to_iq(stream: &[Sample], sample_rate: f64) -> Result<IqBuffer> {
    let sps = integer_ratio(sample_rate, CHIP_RATE)
        .ok_or_else(|| Error::SampleRateMismatch(format!("{sample_rate} Hz is not a multiple of 2 MHz")))?;
    let samples = stream.iter().flat_map(|&c| std::iter::repeat_n(c, sps)).collect();
    IqBuffer::new(samples, sample_rate, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZigbeeDecoded {
    #[serde(serialize_with = "hex")]
    pub payload: Vec<u8>,
    pub rssi_db: f64,
    pub crc_ok: bool,
    pub carrier_offset_hz: f64,
}

fn hex<S: serde::Serializer>(v: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.iter().map(|b| format!("{b:02x}")).collect::<String>())
}

impl ZigbeeDecoded {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct serialises")
    }
}

fn templates(sps: usize) -> Vec<Vec<Sample>> {
    (0..16u8)
        .map(|s| oqpsk(&chip_sequence(s)).iter().flat_map(|&c| std::iter::repeat_n(c.conj(), sps)).collect())
        .collect()
}

fn corr(x: &[Sample], t: &[Sample]) -> f64 {
    // skip the first slot, whose Q chip belongs to the previous symbol
    let skip = t.len() / 32;
    x[skip..].iter().zip(&t[skip..]).map(|(a, b)| a * b).sum::<Sample>().norm()
}

/// Noncoherent receiver: offset correction, preamble timing, per-symbol
/// maximum correlation over the 16 sequences, SFD search, FCS check.
pub fn zigbee_decode(rx: &IqBuffer) -> Result<ZigbeeDecoded> {
    let fs = rx.sample_rate;
    let sps = integer_ratio(fs, CHIP_RATE)
        .ok_or_else(|| Error::SampleRateMismatch(format!("{fs} Hz is not a multiple of 2 MHz")))?;
    let sym_len = 32 * sps;
    if rx.len() < sym_len * 12 {
        return Err(Error::NoPacket);
    }
    let tpl = templates(sps);
    let n_pos = rx.len() - sym_len + 1;
    // Preamble search: split the symbol-0 correlation into 1 µs blocks and
    // take the phase step between neighbours, which survives a carrier
    // offset; summing eight symbol periods picks out the preamble, and its
    // angle is the offset. Cyclic shifts of symbol 0 appear in data, so
    // the earliest strong match wins rather than the largest.
    let block = 2 * sps;
    let step = (sps / 2).max(1);
    let diff: Vec<Sample> = (0..n_pos)
        .step_by(step)
        .map(|n| {
            let seg = &rx.samples[n..n + sym_len];
            // block 0 holds the previous symbol's Q chip, so start at 1
            let parts: Vec<Sample> = (1..16)
                .map(|i| seg[i * block..(i + 1) * block].iter().zip(&tpl[0][i * block..]).map(|(a, b)| a * b).sum())
                .collect();
            parts.windows(2).map(|w| w[1] * w[0].conj()).sum()
        })
        .collect();
    let per_sym = sym_len / step;
    let span = 8 * per_sym;
    if diff.len() <= span {
        return Err(Error::NoPacket);
    }
    let pre: Vec<Sample> = (0..diff.len() - span).map(|i| (0..8).map(|k| diff[i + k * per_sym]).sum()).collect();
    let top = pre.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return Err(Error::NoPacket);
    }
    let first = pre.iter().position(|p| p.norm() >= 0.8 * top).unwrap_or(0);
    let lead = (first..(first + per_sym).min(pre.len()))
        .max_by(|&a, &b| pre[a].norm().total_cmp(&pre[b].norm()))
        .unwrap_or(first);
    let coarse = (lead * step) % sym_len;
    let offset = pre[lead].arg() * fs / (2.0 * PI * block as f64);
    let w = -2.0 * PI * offset / fs;
    let x: Vec<Sample> =
        rx.samples.iter().enumerate().map(|(n, s)| s * Sample::from_polar(1.0, w * n as f64)).collect();

    let mut best = (f64::NEG_INFINITY, coarse);
    for d in -(step as isize)..=(step as isize) {
        let ph = (coarse as isize + d).rem_euclid(sym_len as isize) as usize;
        let e: f64 = (ph..n_pos).step_by(sym_len).map(|n| corr(&x[n..n + sym_len], &tpl[0]).powi(2)).sum();
        if e > best.0 {
            best = (e, ph);
        }
    }
    let phase = best.1;

    let decisions: Vec<(u8, f64)> = (phase..n_pos)
        .step_by(sym_len)
        .map(|n| {
            let seg = &x[n..n + sym_len];
            (0..16u8).map(|s| (s, corr(seg, &tpl[s as usize]))).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap()
        })
        .collect();
    let peak = decisions.iter().map(|d| d.1).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::NoPacket);
    }
    let strong = |k: usize| decisions[k].1 >= 0.3 * peak;
    let syms: Vec<u8> = decisions.iter().map(|d| d.0).collect();
    let sfd_at = (2..syms.len().saturating_sub(1))
        .find(|&k| {
            syms[k - 2] == 0
                && syms[k - 1] == 0
                && syms[k] == (SFD & 0xf)
                && syms[k + 1] == SFD >> 4
                && (k - 2..=k + 1).all(strong)
        })
        .ok_or(Error::NoPacket)?;
    let hdr = sfd_at + 2;
    if hdr + 1 >= syms.len() {
        return Err(Error::NoPacket);
    }
    let len = ((syms[hdr] | (syms[hdr + 1] << 4)) & 0x7f) as usize;
    if len < FCS_LEN || hdr + 2 + 2 * len > syms.len() {
        return Err(Error::NoPacket);
    }
    let body: Vec<u8> = syms[hdr + 2..hdr + 2 + 2 * len].chunks(2).map(|p| p[0] | (p[1] << 4)).collect();
    let (payload, fcs) = body.split_at(len - FCS_LEN);
    let crc_ok = fcs16(payload) == u16::from_le_bytes([fcs[0], fcs[1]]);

    let start = phase + sym_len * sfd_at.saturating_sub(2 * PREAMBLE_BYTES);
    let end = (phase + sym_len * (hdr + 2 + 2 * len)).min(x.len());
    Ok(ZigbeeDecoded {
        payload: payload.to_vec(),
        rssi_db: to_db(mean_power(&rx.samples[start.min(end)..end])),
        crc_ok,
        carrier_offset_hz: offset,
    })
}

/// Bits of `bytes` in transmit order, for BER accounting.
pub fn payload_bits(bytes: &[u8]) -> Vec<u8> {
    bytes_to_bits_lsb(bytes)
}

/// Inverse of [`payload_bits`].
pub fn bits_to_payload(bits: &[u8]) -> Vec<u8> {
    bits_to_bytes_lsb(bits)
}
