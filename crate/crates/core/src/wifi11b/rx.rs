use super::cck::{cck_decode_symbol, quantize_quarter};
use super::dsss::{despread, dqpsk_bits, BARKER};
use super::plcp::{crc32, hec, psdu_len_from_field, FCS_LEN, LONG_SFD, SHORT_SFD};
use super::scrambler::Descrambler;
use super::{Rate, WIFI_CHIP_RATE};
use crate::error::{Error, Result};
use crate::sigcore::{integer_ratio, mean_power, to_db, IqBuffer, Sample};
use crate::{bits_to_bytes_lsb, bytes_to_bits_lsb};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodedPacket {
    /// MAC payload without the FCS.
    #[serde(serialize_with = "hex")]
    pub payload: Vec<u8>,
    pub rate: f64,
    pub short_preamble: bool,
    /// Mean packet power, dB relative to the buffer's unit power.
    pub rssi_db: f64,
    pub crc_ok: bool,
    pub carrier_offset_hz: f64,
}

fn hex<S: serde::Serializer>(v: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.iter().map(|b| format!("{b:02x}")).collect::<String>())
}

impl DecodedPacket {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct serialises")
    }
}

/// Offset from chip-to-chip phase steps inside each Barker symbol of
/// `syms` (symbol indices). Removing the code leaves one data value per
/// symbol, so the lag-one product carries only the rotation.
fn chip_lag_offset(chips: &[Sample], o: usize, syms: std::ops::Range<usize>) -> f64 {
    let acc: Sample = syms
        .filter_map(|m| chips.get(o + 11 * m..o + 11 * m + 11))
        .flat_map(|c| (1..11).map(move |k| c[k] * BARKER[k] * (c[k - 1] * BARKER[k - 1]).conj()))
        .sum();
    if acc.norm() == 0.0 {
        0.0
    } else {
        acc.arg() * WIFI_CHIP_RATE / (2.0 * PI)
    }
}

fn derotate(x: &[Sample], offset: f64, fs: f64) -> Vec<Sample> {
    let w = -2.0 * PI * offset / fs;
    x.iter().enumerate().map(|(n, s)| s * Sample::from_polar(1.0, w * n as f64)).collect()
}

/// Sample phase and Barker alignment with the most despread energy.
fn chip_timing(x: &[Sample], sps: usize) -> (usize, usize) {
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for p in 0..sps {
        let chips = chips_at_phase(x, sps, p);
        for o in 0..11 {
            let e: f64 = chips[o.min(chips.len())..].chunks_exact(11).map(|c| despread(c).norm_sqr()).sum();
            if e > best.0 {
                best = (e, p, o);
            }
        }
    }
    (best.1, best.2)
}

fn despread_all(chips: &[Sample], o: usize) -> Vec<Sample> {
    chips[o.min(chips.len())..].chunks_exact(11).map(despread).collect()
}

/// Symbols within 10 dB of the strongest one.
fn strong_symbols(sym: &[Sample]) -> Result<Vec<bool>> {
    let peak = sym.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::NoPacket);
    }
    Ok(sym.iter().map(|s| s.norm_sqr() >= 0.1 * peak).collect())
}

/// Integrate-and-dump chips for sample phase `p`.
fn chips_at_phase(x: &[Sample], sps: usize, p: usize) -> Vec<Sample> {
    x[p.min(x.len())..].chunks_exact(sps).map(|c| c.iter().sum::<Sample>() / sps as f64).collect()
}

fn bits_of(word: u16) -> Vec<u8> {
    bytes_to_bits_lsb(&word.to_le_bytes())
}

/// Reference 802.11b receiver for a buffer centred on the Wi-Fi channel.
pub fn decode_packet(rx: &IqBuffer) -> Result<DecodedPacket> {
    let fs = rx.sample_rate;
    let sps = integer_ratio(fs, WIFI_CHIP_RATE)
        .filter(|&s| s >= 2)
        .ok_or_else(|| Error::SampleRateMismatch(format!("{fs} Hz is not a multiple of 22 MHz")))?;
    if rx.len() < 11 * sps * 32 {
        return Err(Error::NoPacket);
    }

    // timing on the raw samples tolerates a few hundred kHz of offset
    let (p, o) = chip_timing(&rx.samples, sps);
    let strong = strong_symbols(&despread_all(&chips_at_phase(&rx.samples, sps, p), o))?;
    let first = strong.windows(8).position(|w| w.iter().all(|&s| s)).unwrap_or(0);
    let sync = first..first + 48;
    let coarse = chip_lag_offset(&chips_at_phase(&rx.samples, sps, p), o, sync.clone());
    let x = derotate(&rx.samples, coarse, fs);

    // residual from the DBPSK sync: squaring strips the data phase
    let sym = despread_all(&chips_at_phase(&x, sps, p), o);
    let acc: Sample = (sync.start + 1..sync.end.min(sym.len())).map(|m| (sym[m] * sym[m - 1].conj()).powi(2)).sum();
    let fine = if acc.norm() > 0.0 { acc.arg() / (2.0 * 2.0 * PI * 11.0 / WIFI_CHIP_RATE) } else { 0.0 };
    let offset = coarse + fine;
    let x = derotate(&rx.samples, offset, fs);
    let chips = chips_at_phase(&x, sps, p);
    let sym = despread_all(&chips, o);
    let strong = strong_symbols(&sym)?;

    // DBPSK raw bits and SFD search on the descrambled stream
    let mut raw = vec![0u8; sym.len()];
    for m in 1..sym.len() {
        raw[m] = ((sym[m] * sym[m - 1].conj()).re < 0.0) as u8;
    }
    let desc = Descrambler::new(0).run(&raw);
    let long = bits_of(LONG_SFD);
    let short = bits_of(SHORT_SFD);
    let mut found = None;
    for m in 24..sym.len() {
        let win = &desc[m - 15..=m];
        if !strong[m - 23..=m].iter().all(|&s| s) {
            continue;
        }
        if win == long.as_slice() {
            found = Some((m, false));
            break;
        }
        if win == short.as_slice() {
            found = Some((m, true));
            break;
        }
    }
    let (sfd_end, short_pre) = found.ok_or(Error::NoPacket)?;

    // header
    let mut raw_hdr = Vec::with_capacity(48);
    let hdr_syms = if short_pre { 24 } else { 48 };
    let hdr_last = sfd_end + hdr_syms;
    if hdr_last >= sym.len() {
        return Err(Error::NoPacket);
    }
    for m in sfd_end + 1..=hdr_last {
        let z = sym[m] * sym[m - 1].conj();
        if short_pre {
            raw_hdr.extend(dqpsk_bits(quantize_quarter(z)));
        } else {
            raw_hdr.push((z.re < 0.0) as u8);
        }
    }
    let mut descr = Descrambler::new(0);
    descr.run(&raw[..=sfd_end]);
    let hdr = descr.run(&raw_hdr);
    let hb = bits_to_bytes_lsb(&hdr[..32]);
    let hec_rx = hdr[32..].iter().fold(0u16, |acc, &b| (acc << 1) | b as u16);
    let (signal, service) = (hb[0], hb[1]);
    let length = u16::from_le_bytes([hb[2], hb[3]]);
    if hec(signal, service, length) != hec_rx {
        return Err(Error::HeaderError);
    }
    let rate = Rate::from_signal(signal).ok_or(Error::HeaderError)?;
    let psdu_len = psdu_len_from_field(rate, length, service & 0x80 != 0);
    if psdu_len < FCS_LEN {
        return Err(Error::HeaderError);
    }
    let n_bits = psdu_len * 8;

    // PSDU
    let mut raw_body = Vec::with_capacity(n_bits);
    let end_chip;
    match rate {
        Rate::R1 | Rate::R2 => {
            let per = if rate == Rate::R1 { 1 } else { 2 };
            let n_sym = n_bits / per;
            if hdr_last + n_sym >= sym.len() {
                return Err(Error::NoPacket);
            }
            for m in hdr_last + 1..=hdr_last + n_sym {
                let z = sym[m] * sym[m - 1].conj();
                if per == 1 {
                    raw_body.push((z.re < 0.0) as u8);
                } else {
                    raw_body.extend(dqpsk_bits(quantize_quarter(z)));
                }
            }
            end_chip = o + 11 * (hdr_last + n_sym + 1);
        }
        Rate::R5_5 | Rate::R11 => {
            let per = if rate == Rate::R5_5 { 4 } else { 8 };
            let n_sym = n_bits / per;
            let start = o + 11 * (hdr_last + 1);
            end_chip = start + 8 * n_sym;
            if end_chip > chips.len() {
                return Err(Error::NoPacket);
            }
            let mut reference = sym[hdr_last];
            for i in 0..n_sym {
                let c = &chips[start + 8 * i..start + 8 * i + 8];
                raw_body.extend(cck_decode_symbol(c, rate, i, &mut reference));
            }
        }
    }
    let body = descr.run(&raw_body);
    let psdu = bits_to_bytes_lsb(&body);
    let (payload, fcs) = psdu.split_at(psdu_len - FCS_LEN);
    let crc_ok = crc32(payload) == u32::from_le_bytes([fcs[0], fcs[1], fcs[2], fcs[3]]);

    let sync_syms = if short_pre { 56 } else { 128 };
    let start_chip = o + 11 * (sfd_end + 1).saturating_sub(16 + sync_syms);
    let a = (p + start_chip * sps).min(x.len());
    let b = (p + end_chip * sps).min(x.len());
    Ok(DecodedPacket {
        payload: payload.to_vec(),
        rate: rate.mbps(),
        short_preamble: short_pre,
        rssi_db: to_db(mean_power(&rx.samples[a..b])),
        crc_ok,
        carrier_offset_hz: offset,
    })
}
