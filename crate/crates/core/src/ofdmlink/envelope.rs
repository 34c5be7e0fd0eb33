use super::SYNC_PATTERN;
use crate::error::{Error, Result};
use crate::sigcore::{integer_ratio, IqBuffer};
use serde::Serialize;

const SYNC_FRACTION: f64 = 0.7;

/// Envelope-detector receiver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConfig {
    /// Peak-detector decay time constant.
    pub tau_s: f64,
    /// One OFDM symbol, the averaging window.
    pub symbol_s: f64,
    pub sync: u8,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { tau_s: 0.1e-6, symbol_s: 4e-6, sync: SYNC_PATTERN }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeDecoded {
    /// Data bits after the sync pattern.
    pub bits: Vec<u8>,
    /// First sample of the sync pattern.
    pub offset: usize,
    /// Mean detector output over (random, random) windows of the sync.
    pub high_level: f64,
    /// Mean detector output over constant-symbol windows of the sync.
    pub low_level: f64,
}

impl EnvelopeDecoded {
    pub fn threshold(&self) -> f64 {
        0.5 * (self.high_level + self.low_level)
    }

    pub fn to_hex(&self) -> String {
        self.bits
            .chunks(8)
            .map(|c| {
                let v = c.iter().enumerate().fold(0u8, |a, (i, &b)| a | (b << (7 - i)));
                format!("{v:02x}")
            })
            .collect()
    }
}

/// Rectifier plus RC hold: `y[n] = max(|x[n]|, y[n-1]·e^{-1/(τ·fs)})`.
pub fn peak_detect(env: &[f64], fs: f64, tau_s: f64) -> Vec<f64> {
    let decay = (-1.0 / (tau_s * fs)).exp();
    let mut y = 0.0f64;
    env.iter()
        .map(|&a| {
            y = a.abs().max(y * decay);
            y
        })
        .collect()
}

fn sync_template(sync: u8) -> Vec<f64> {
    // +1 for a random (high) symbol, −1 for a constant (low) one
    (0..8).rev().flat_map(|i| [1.0, if (sync >> i) & 1 == 1 { -1.0 } else { 1.0 }]).collect()
}

/// Recover downlink bits from the amplitude of an OFDM burst.
///
/// Symbol timing comes from correlating per-symbol window means with the
/// sync pattern; the high and low reference levels are the sync's own
/// window means. Decoding stops after `max_bits` or when the first
/// symbol of a pair no longer looks like a transmission.
pub fn envelope_decode(rx: &IqBuffer, cfg: &EnvelopeConfig, max_bits: Option<usize>) -> Result<EnvelopeDecoded> {
    let fs = rx.sample_rate;
    let w = integer_ratio(cfg.symbol_s * fs, 1.0)
        .filter(|&w| w > 0)
        .ok_or_else(|| Error::SampleRateMismatch(format!("{fs} Hz gives a fractional symbol")))?;
    let template = sync_template(cfg.sync);
    let span = template.len() * w;
    if rx.len() < span {
        return Err(Error::NoDownlinkFrame);
    }
    let y = peak_detect(&rx.envelope(), fs, cfg.tau_s);
    let mut prefix = vec![0.0; y.len() + 1];
    for (i, v) in y.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    let window = |start: usize| (prefix[start + w] - prefix[start]) / w as f64;

    let tmean = template.iter().sum::<f64>() / template.len() as f64;
    let corr: Vec<f64> = (0..=rx.len() - span)
        .map(|o| template.iter().enumerate().map(|(k, t)| (t - tmean) * window(o + k * w)).sum())
        .collect();
    let peak = corr.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::NoDownlinkFrame);
    }
    // the first strong peak, not the global one: data can mimic the sync
    let first = corr.iter().position(|&c| c >= SYNC_FRACTION * peak).unwrap_or(0);
    let end = (first + w).min(corr.len());
    let offset = first + (first..end).fold(0, |b, i| if corr[i] > corr[first + b] { i - first } else { b });
    let (mut hi, mut lo, mut nh, mut nl) = (0.0, 0.0, 0, 0);
    for (k, t) in template.iter().enumerate() {
        let m = window(offset + k * w);
        if *t > 0.0 {
            hi += m;
            nh += 1;
        } else {
            lo += m;
            nl += 1;
        }
    }
    let (high, low) = (hi / nh as f64, lo / nl.max(1) as f64);
    let decide = |m: f64| ((m - low).abs() < (m - high).abs()) as u8;

    let sync_bits: Vec<u8> = (0..8).map(|i| decide(window(offset + (2 * i + 1) * w))).collect();
    let want: Vec<u8> = (0..8).rev().map(|i| (cfg.sync >> i) & 1).collect();
    if sync_bits != want {
        return Err(Error::NoDownlinkFrame);
    }

    let mut bits = Vec::new();
    let mut at = offset + span;
    while at + 2 * w <= rx.len() && max_bits.is_none_or(|m| bits.len() < m) {
        let first = window(at);
        if max_bits.is_none() && first < 0.5 * high {
            break;
        }
        bits.push(decide(window(at + w)));
        at += 2 * w;
    }
    Ok(EnvelopeDecoded { bits, offset, high_level: high, low_level: low })
}
