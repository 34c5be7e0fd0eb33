use super::{integer_ratio, mix, IqBuffer, Sample};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Unit-DC-gain Gaussian lowpass with 3 dB bandwidth `bt * symbol_rate`,
/// sampled at `sample_rate` over `span_symbols` symbols.
pub fn gaussian_filter_taps(bt: f64, symbol_rate: f64, sample_rate: f64, span_symbols: usize) -> Result<Vec<f64>> {
    if !(bt > 0.0 && bt <= 1.0) {
        return Err(Error::InvalidParameter(format!("bt must be in (0, 1], got {bt}")));
    }
    let sps = integer_ratio(sample_rate, symbol_rate).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "sample rate {sample_rate} is not an integer multiple of symbol rate {symbol_rate}"
        ))
    })?;
    let len = span_symbols * sps + 1;
    let b = bt * symbol_rate;
    let mid = (len - 1) as f64 / 2.0;
    let k = 2.0 * PI * PI * b * b / 2f64.ln();
    let mut taps: Vec<f64> = (0..len)
        .map(|i| {
            let t = (i as f64 - mid) / sample_rate;
            (-k * t * t).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(taps)
}

/// Blackman-windowed sinc lowpass with unit DC gain.
pub fn lowpass_taps(cutoff: f64, sample_rate: f64, n_taps: usize) -> Vec<f64> {
    assert!(n_taps >= 1, "need at least one tap");
    let fc = cutoff / sample_rate;
    let mid = (n_taps - 1) as f64 / 2.0;
    let mut taps: Vec<f64> = (0..n_taps)
        .map(|i| {
            let x = i as f64 - mid;
            let sinc = if x == 0.0 { 2.0 * fc } else { (2.0 * PI * fc * x).sin() / (PI * x) };
            let w = if n_taps == 1 {
                1.0
            } else {
                let r = i as f64 / (n_taps - 1) as f64;
                0.42 - 0.5 * (2.0 * PI * r).cos() + 0.08 * (4.0 * PI * r).cos()
            };
            sinc * w
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Zero-phase FIR: output has the input's length, aligned on the tap centre.
pub fn fir_filter(samples: &[Sample], taps: &[f64]) -> Vec<Sample> {
    decimating_fir(samples, taps, 1)
}

fn decimating_fir(samples: &[Sample], taps: &[f64], decim: usize) -> Vec<Sample> {
    let n = samples.len();
    let half = (taps.len() - 1) / 2;
    let out_len = n.div_ceil(decim);
    (0..out_len)
        .map(|k| {
            let centre = k * decim;
            let mut acc = Sample::new(0.0, 0.0);
            for (m, &h) in taps.iter().enumerate() {
                let idx = centre as isize + m as isize - half as isize;
                if idx >= 0 && (idx as usize) < n {
                    acc += samples[idx as usize] * h;
                }
            }
            acc
        })
        .collect()
}

/// Receiver front end: translate `offset` Hz (baseband) down to 0 Hz,
/// lowpass at `cutoff`, and decimate to `out_rate`.
pub fn downconvert(buf: &IqBuffer, offset: f64, out_rate: f64, cutoff: f64, n_taps: usize) -> Result<IqBuffer> {
    let decim = integer_ratio(buf.sample_rate, out_rate).ok_or_else(|| {
        Error::SampleRateMismatch(format!("{} Hz is not an integer multiple of {out_rate} Hz", buf.sample_rate))
    })?;
    let shifted = mix(buf, -offset)?;
    let taps = lowpass_taps(cutoff, buf.sample_rate, n_taps);
    let samples = decimating_fir(&shifted.samples, &taps, decim);
    IqBuffer::new(samples, out_rate, shifted.center_freq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::periodogram;

    #[test]
    fn gaussian_taps_normalized_and_symmetric() {
        let taps = gaussian_filter_taps(0.5, 1e6, 8e6, 3).unwrap();
        assert_eq!(taps.len(), 25);
        assert!((taps.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for i in 0..taps.len() {
            assert_eq!(taps[i], taps[taps.len() - 1 - i]);
        }
    }

    #[test]
    fn gaussian_center_tap_matches_sigma_form() {
        // Independent parameterisation: h ∝ exp(-t²/2σ²), σ = √ln2 / (2π·B).
        // Value frozen from an offline evaluation of that form.
        let taps = gaussian_filter_taps(0.5, 1e6, 8e6, 4).unwrap();
        assert_eq!(taps.len(), 33);
        assert!((taps[16] - 0.188_172_961_947_313_95).abs() < 1e-12, "{}", taps[16]);
    }

    #[test]
    fn gaussian_taps_decay_from_center() {
        let taps = gaussian_filter_taps(0.3, 1e6, 16e6, 4).unwrap();
        let c = taps.len() / 2;
        assert!(taps[c..].windows(2).all(|w| w[1] < w[0]));
        assert!(taps[..=c].windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn gaussian_rejects_fractional_oversampling() {
        assert!(gaussian_filter_taps(0.5, 1e6, 2.5e6, 3).is_err());
        assert!(gaussian_filter_taps(0.0, 1e6, 8e6, 3).is_err());
        assert!(gaussian_filter_taps(1.5, 1e6, 8e6, 3).is_err());
    }

    #[test]
    fn downconvert_selects_band() {
        let fs = 88e6;
        let want = IqBuffer::tone(20e6, 8800, fs, 0.0).unwrap();
        let unwanted = IqBuffer::tone(-30e6, 8800, fs, 0.0).unwrap();
        let rx = want.add(&unwanted).unwrap();
        let out = downconvert(&rx, 20e6, 22e6, 8e6, 129).unwrap();
        assert_eq!(out.sample_rate, 22e6);
        assert_eq!(out.center_freq, 20e6);
        let s = periodogram(&out.slice(100, 2100), 256).unwrap();
        assert!(s.peak_freq().abs() < s.resolution_bw);
        assert!(s.line_db(0.0, 2) > -0.5);
    }
}
