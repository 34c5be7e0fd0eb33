use super::{BLE_BIT_RATE, FREQ_DEVIATION_HZ};
use crate::error::{Error, Result};
use crate::sigcore::{gaussian_filter_taps, integer_ratio, IqBuffer, Sample};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GfskConfig {
    pub bt: f64,
    pub span_symbols: usize,
    pub deviation_hz: f64,
}

impl Default for GfskConfig {
    fn default() -> Self {
        Self { bt: 0.5, span_symbols: 3, deviation_hz: FREQ_DEVIATION_HZ }
    }
}

/// GFSK at 1 Mbps with the default BT 0.5 pulse and ±250 kHz deviation.
pub fn gfsk_modulate(bits: &[u8], sample_rate: f64) -> Result<IqBuffer> {
    gfsk_modulate_with(bits, sample_rate, &GfskConfig::default())
}

/// Continuous-phase GFSK; a one bit pushes the frequency up.
///
/// The NRZ stream is extended with copies of its first and last bit so the
/// Gaussian pulse settles fully at both edges.
pub fn gfsk_modulate_with(bits: &[u8], sample_rate: f64, cfg: &GfskConfig) -> Result<IqBuffer> {
    let sps = integer_ratio(sample_rate, BLE_BIT_RATE)
        .ok_or_else(|| Error::InvalidParameter(format!("sample rate {sample_rate} is not a multiple of 1 MHz")))?;
    if bits.is_empty() {
        return IqBuffer::new(Vec::new(), sample_rate, 0.0);
    }
    let taps = gaussian_filter_taps(cfg.bt, BLE_BIT_RATE, sample_rate, cfg.span_symbols)?;
    let freq = shaped_frequency(bits, sps, &taps);
    let k = 2.0 * PI * cfg.deviation_hz / sample_rate;
    let mut phase = 0.0f64;
    let samples = freq
        .iter()
        .map(|&f| {
            let s = Sample::from_polar(1.0, phase);
            phase = (phase + k * f).rem_euclid(2.0 * PI);
            s
        })
        .collect();
    IqBuffer::new(samples, sample_rate, 0.0)
}

/// Gaussian-filtered NRZ, one value per output sample.
///
/// The input is piecewise constant per bit, so each output is a sum over the
/// few bits under the pulse of (bit level × tap mass over the overlap),
/// evaluated with prefix sums of the taps.
fn shaped_frequency(bits: &[u8], sps: usize, taps: &[f64]) -> Vec<f64> {
    let half = (taps.len() - 1) / 2;
    let mut prefix = Vec::with_capacity(taps.len() + 1);
    prefix.push(0.0);
    for t in taps {
        prefix.push(prefix.last().unwrap() + t);
    }
    let level = |b: isize| -> f64 {
        let i = b.clamp(0, bits.len() as isize - 1) as usize;
        if bits[i] != 0 {
            1.0
        } else {
            -1.0
        }
    };
    let n = bits.len() * sps;
    let sps_i = sps as isize;
    (0..n as isize)
        .map(|t| {
            // window of input samples t - half ..= t + half, tap index m = t + half - idx
            let lo = t - half as isize;
            let hi = t + half as isize;
            let mut acc = 0.0;
            let mut idx = lo;
            while idx <= hi {
                let b = idx.div_euclid(sps_i);
                let end = ((b + 1) * sps_i - 1).min(hi);
                // taps for idx..=end are m = t+half-end ..= t+half-idx
                let m_lo = (t + half as isize - end) as usize;
                let m_hi = (t + half as isize - idx) as usize;
                acc += level(b) * (prefix[m_hi + 1] - prefix[m_lo]);
                idx = end + 1;
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::periodogram;

    fn direct_convolution(bits: &[u8], sps: usize, taps: &[f64]) -> Vec<f64> {
        let half = (taps.len() - 1) / 2;
        let nrz = |i: isize| {
            let b = (i.div_euclid(sps as isize)).clamp(0, bits.len() as isize - 1) as usize;
            if bits[b] == 1 {
                1.0
            } else {
                -1.0
            }
        };
        (0..(bits.len() * sps) as isize)
            .map(|t| taps.iter().enumerate().map(|(m, h)| h * nrz(t + half as isize - m as isize)).sum())
            .collect()
    }

    #[test]
    fn prefix_sum_shaping_equals_direct_convolution() {
        let bits = [1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 0, 1];
        let taps = gaussian_filter_taps(0.5, 1e6, 8e6, 3).unwrap();
        let fast = shaped_frequency(&bits, 8, &taps);
        let slow = direct_convolution(&bits, 8, &taps);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_envelope() {
        let bits: Vec<u8> = (0..200).map(|i| ((i * 7 + i / 3) % 2) as u8).collect();
        let buf = gfsk_modulate(&bits, 8e6).unwrap();
        assert_eq!(buf.len(), 1600);
        assert!(buf.samples.iter().all(|s| (s.norm() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn ones_and_zeros_tones() {
        for (bit, f) in [(1u8, 250e3), (0u8, -250e3)] {
            let buf = gfsk_modulate(&vec![bit; 512], 8e6).unwrap();
            let s = periodogram(&buf, 256).unwrap();
            assert!((s.peak_freq() - f).abs() <= s.resolution_bw, "{}", s.peak_freq());
        }
    }

    #[test]
    fn alternating_pattern_is_symmetric() {
        let bits: Vec<u8> = (0..1024).map(|i| (i % 2) as u8).collect();
        let s = periodogram(&gfsk_modulate(&bits, 8e6).unwrap(), 256).unwrap();
        let lower = s.band_fraction(-4e6, -s.resolution_bw / 2.0);
        let upper = s.band_fraction(s.resolution_bw / 2.0, 4e6);
        assert!((10.0 * (upper / lower).log10()).abs() < 1.0);
    }

    #[test]
    fn empty_and_bad_rate() {
        assert!(gfsk_modulate(&[], 8e6).unwrap().is_empty());
        assert!(gfsk_modulate(&[1, 0], 2.5e6).is_err());
    }
}
