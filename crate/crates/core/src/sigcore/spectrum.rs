use super::{IqBuffer, Sample};
use crate::error::{Error, Result};
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Clamp for the log of zero power.
pub const FLOOR_DB: f64 = -300.0;

/// Power per frequency bin, in dB relative to the total (time-domain) power
/// of the analysed buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Baseband bin frequencies, strictly increasing, from -fs/2.
    pub bin_freqs: Vec<f64>,
    pub power_db: Vec<f64>,
    pub resolution_bw: f64,
    /// mean(|s|²) of the analysed buffer.
    pub total_power: f64,
}

/// Welch periodogram over `nfft`-point segments with 50 % overlap.
///
/// Uses a sine window: at 50 % overlap the squared windows of neighbouring
/// segments sum to exactly one, and the buffer is zero-padded by half a
/// segment on each side, so every input sample carries unit weight and the
/// integrated spectrum equals mean(|s|²) exactly (Parseval).
pub fn periodogram(buf: &IqBuffer, nfft: usize) -> Result<Spectrum> {
    if nfft < 2 || !nfft.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("nfft must be even and >= 2, got {nfft}")));
    }
    let n = buf.len();
    if n < nfft {
        return Err(Error::InsufficientSamples { needed: nfft, have: n });
    }
    let hop = nfft / 2;
    let segments = (hop + n - 1) / hop + 1;
    let padded_len = (segments + 1) * hop;
    let zero = Sample::new(0.0, 0.0);
    let mut padded = vec![zero; padded_len];
    padded[hop..hop + n].copy_from_slice(&buf.samples);

    let window: Vec<f64> = (0..nfft).map(|i| (PI * (i as f64 + 0.5) / nfft as f64).sin()).collect();

    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let mut acc = vec![0.0f64; nfft];
    let mut seg = vec![zero; nfft];
    for m in 0..segments {
        let start = m * hop;
        for (i, s) in seg.iter_mut().enumerate() {
            *s = padded[start + i] * window[i];
        }
        fft.process(&mut seg);
        for (a, s) in acc.iter_mut().zip(&seg) {
            *a += s.norm_sqr();
        }
    }

    let total_power = buf.power();
    let norm = 1.0 / (n as f64 * nfft as f64);
    let fs = buf.sample_rate;
    let mut bin_freqs = Vec::with_capacity(nfft);
    let mut power_db = Vec::with_capacity(nfft);
    // fftshift: bin k of the output corresponds to FFT index (k + nfft/2) mod nfft
    for k in 0..nfft {
        let idx = (k + hop) % nfft;
        bin_freqs.push((k as f64 - hop as f64) * fs / nfft as f64);
        let p = acc[idx] * norm;
        power_db.push(if total_power > 0.0 { super::to_db(p / total_power) } else { FLOOR_DB });
    }
    Ok(Spectrum { bin_freqs, power_db, resolution_bw: fs / nfft as f64, total_power })
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.bin_freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_freqs.is_empty()
    }

    /// Linear bin powers as fractions of the total power.
    pub fn fractions(&self) -> Vec<f64> {
        self.power_db.iter().map(|&db| if db <= FLOOR_DB { 0.0 } else { super::from_db(db) }).collect()
    }

    /// Integrated power relative to `total_power` (1.0 when Parseval holds).
    pub fn integrated_fraction(&self) -> f64 {
        self.fractions().iter().sum()
    }

    pub fn peak_bin(&self) -> usize {
        self.power_db
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
            .0
    }

    pub fn peak_freq(&self) -> f64 {
        self.bin_freqs[self.peak_bin()]
    }

    pub fn bin_of(&self, freq: f64) -> usize {
        let half = self.len() as f64 / 2.0;
        let k = (freq / self.resolution_bw + half).round();
        k.clamp(0.0, self.len() as f64 - 1.0) as usize
    }

    /// Fraction of total power in bins whose centre lies in `[lo, hi]`.
    pub fn band_fraction(&self, lo: f64, hi: f64) -> f64 {
        self.bin_freqs.iter().zip(self.fractions()).filter(|(f, _)| **f >= lo && **f <= hi).map(|(_, p)| p).sum()
    }

    /// Power of a spectral line at `freq`, summed over `±halfwidth` bins, in dB
    /// relative to total power.
    pub fn line_db(&self, freq: f64, halfwidth: usize) -> f64 {
        let c = self.bin_of(freq) as isize;
        let fr = self.fractions();
        let sum: f64 = (c - halfwidth as isize..=c + halfwidth as isize)
            .filter(|&k| k >= 0 && (k as usize) < fr.len())
            .map(|k| fr[k as usize])
            .sum();
        super::to_db(sum)
    }

    /// Width between the outermost bins within `drop_db` of the peak.
    pub fn bandwidth_below_peak(&self, drop_db: f64) -> f64 {
        let peak = self.power_db[self.peak_bin()];
        let above: Vec<usize> = (0..self.len()).filter(|&k| self.power_db[k] >= peak - drop_db).collect();
        match (above.first(), above.last()) {
            (Some(&lo), Some(&hi)) => self.bin_freqs[hi] - self.bin_freqs[lo] + self.resolution_bw,
            _ => 0.0,
        }
    }

    pub fn median_db(&self) -> f64 {
        let mut v = self.power_db.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    }

    /// CSV with header `freq_hz,power_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,power_db\n");
        for (f, p) in self.bin_freqs.iter().zip(&self.power_db) {
            out.push_str(&format!("{f},{p:.4}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::IqBuffer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_tone_dominates() {
        let buf = IqBuffer::tone(1e6, 8192, 16e6, 0.0).unwrap();
        let s = periodogram(&buf, 256).unwrap();
        assert!((s.peak_freq() - 1e6).abs() < 1.0);
        assert!(s.power_db[s.peak_bin()] - s.median_db() >= 30.0);
    }

    #[test]
    fn zero_buffer_reports_floor() {
        let buf = IqBuffer::zeros(1024, 16e6, 0.0).unwrap();
        let s = periodogram(&buf, 128).unwrap();
        assert!(s.power_db.iter().all(|&p| p == FLOOR_DB));
    }

    #[test]
    fn two_equal_tones_equal_bins() {
        // Analytic PSD of two equal-amplitude tones: two identical lines.
        let a = IqBuffer::tone(2e6, 16384, 16e6, 0.0).unwrap();
        let b = IqBuffer::tone(-2e6, 16384, 16e6, 0.0).unwrap();
        let s = periodogram(&a.add(&b).unwrap(), 256).unwrap();
        let hi = s.power_db[s.bin_of(2e6)];
        let lo = s.power_db[s.bin_of(-2e6)];
        assert!((hi - lo).abs() < 0.5, "{hi} vs {lo}");
    }

    #[test]
    fn too_short_is_insufficient() {
        let buf = IqBuffer::zeros(100, 1e6, 0.0).unwrap();
        assert!(matches!(periodogram(&buf, 128), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn bins_strictly_increasing() {
        let buf = IqBuffer::zeros(64, 1e6, 0.0).unwrap();
        let s = periodogram(&buf, 64).unwrap();
        assert!(s.bin_freqs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn parseval_on_bursty_signal() {
        // A burst confined to one corner of the buffer still integrates exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut buf = IqBuffer::zeros(3001, 1e6, 0.0).unwrap();
        for s in buf.samples[2900..].iter_mut() {
            *s = Sample::new(rng.gen::<f64>(), rng.gen::<f64>());
        }
        let s = periodogram(&buf, 64).unwrap();
        assert!((10.0 * s.integrated_fraction().log10()).abs() < 1e-9);
    }
}
