//! Foundational signal types: complex baseband buffers, spectra, pulse
//! shaping, frequency translation and resampling.
//!
//! All operations are pure; buffers are plain values.

mod filter;
mod iqfile;
mod spectrum;

pub use filter::{downconvert, fir_filter, gaussian_filter_taps, lowpass_taps};
pub use iqfile::{read_iq, sidecar_path, write_iq, IqMeta};
pub use spectrum::{periodogram, Spectrum, FLOOR_DB};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// One complex sample.
pub type Sample = Complex64;

/// 11 Mchip/s 802.11b chip clock, the base of the backscatter frequency plan.
pub const WIFI_CHIP_RATE: f64 = 11e6;

/// Uniformly sampled complex baseband signal.
///
/// `center_freq` is an annotation of the RF frequency that baseband 0 Hz
/// stands for; it does not affect any arithmetic on the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    pub samples: Vec<Sample>,
    pub sample_rate: f64,
    pub center_freq: f64,
}

impl IqBuffer {
    pub fn new(samples: Vec<Sample>, sample_rate: f64, center_freq: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::InvalidParameter(format!("sample_rate must be positive, got {sample_rate}")));
        }
        Ok(Self { samples, sample_rate, center_freq })
    }

    pub fn zeros(len: usize, sample_rate: f64, center_freq: f64) -> Result<Self> {
        Self::new(vec![Sample::new(0.0, 0.0); len], sample_rate, center_freq)
    }

    /// Complex exponential at `freq` Hz (relative to baseband), unit amplitude.
    pub fn tone(freq: f64, len: usize, sample_rate: f64, center_freq: f64) -> Result<Self> {
        let w = 2.0 * PI * freq / sample_rate;
        let samples = (0..len).map(|n| Sample::from_polar(1.0, w * n as f64)).collect();
        Self::new(samples, sample_rate, center_freq)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Mean of |s|²; zero for an empty buffer.
    pub fn power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn power_db(&self) -> f64 {
        to_db(self.power())
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self { samples: self.samples.iter().map(|s| s * gain).collect(), ..self.clone() }
    }

    /// Sample-wise sum. The buffers must share a sample rate; the shorter one
    /// is treated as zero-padded.
    pub fn add(&self, other: &IqBuffer) -> Result<Self> {
        check_same_rate(self, other)?;
        let n = self.len().max(other.len());
        let zero = Sample::new(0.0, 0.0);
        let samples = (0..n)
            .map(|i| self.samples.get(i).copied().unwrap_or(zero) + other.samples.get(i).copied().unwrap_or(zero))
            .collect();
        Ok(Self { samples, sample_rate: self.sample_rate, center_freq: self.center_freq })
    }

    pub fn slice(&self, start: usize, end: usize) -> Self {
        let end = end.min(self.len());
        let start = start.min(end);
        Self { samples: self.samples[start..end].to_vec(), ..self.clone() }
    }

    /// Prepend `before` and append `after` zero samples.
    pub fn padded(&self, before: usize, after: usize) -> Self {
        let zero = Sample::new(0.0, 0.0);
        let mut samples = Vec::with_capacity(before + self.len() + after);
        samples.resize(before, zero);
        samples.extend_from_slice(&self.samples);
        samples.resize(before + self.len() + after, zero);
        Self { samples, ..self.clone() }
    }

    pub fn envelope(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm()).collect()
    }
}

pub(crate) fn check_same_rate(a: &IqBuffer, b: &IqBuffer) -> Result<()> {
    if (a.sample_rate - b.sample_rate).abs() > 1e-9 * a.sample_rate {
        return Err(Error::SampleRateMismatch(format!("{} Hz vs {} Hz", a.sample_rate, b.sample_rate)));
    }
    Ok(())
}

pub fn mean_power(samples: &[Sample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// 10·log10 with the floor clamp used across the crate.
pub fn to_db(power: f64) -> f64 {
    if power > 0.0 {
        (10.0 * power.log10()).max(FLOOR_DB)
    } else {
        FLOOR_DB
    }
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Integer ratio `num / den`, or `None` when it is not (numerically) integral.
pub fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    if !(den > 0.0) || !(num > 0.0) {
        return None;
    }
    let r = num / den;
    let k = r.round();
    if k >= 1.0 && (r - k).abs() < 1e-9 * k.max(1.0) {
        Some(k as usize)
    } else {
        None
    }
}

/// Frequency translation: multiply by e^{j2π·offset·n/fs}.
pub fn mix(buf: &IqBuffer, offset: f64) -> Result<IqBuffer> {
    if offset.abs() >= buf.sample_rate / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "|offset| {offset} Hz must be below fs/2 = {} Hz",
            buf.sample_rate / 2.0
        )));
    }
    let w = 2.0 * PI * offset / buf.sample_rate;
    let samples = buf.samples.iter().enumerate().map(|(n, s)| s * Sample::from_polar(1.0, w * n as f64)).collect();
    Ok(IqBuffer { samples, sample_rate: buf.sample_rate, center_freq: buf.center_freq - offset })
}
