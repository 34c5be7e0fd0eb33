//! Link budget, noise and scene composition between the Bluetooth source,
//! the backscatter tag and the receiver.
//!
//! Powers are in dBm; inside sample buffers one unit of power is one mW.

use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::sigcore::{from_db, to_db, IqBuffer, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    /// Source to tag.
    pub d1_m: f64,
    /// Tag to receiver.
    pub d2_m: f64,
    /// Source to receiver (direct-path carrier).
    pub d3_m: f64,
    pub path_loss_exponent: f64,
    /// Round-trip loss of the reflection itself.
    pub backscatter_efficiency_db: f64,
    pub noise_floor_dbm: f64,
    pub carrier_freq_hz: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 20.0,
            d1_m: 0.3,
            d2_m: 3.0,
            d3_m: 3.0,
            path_loss_exponent: 2.0,
            backscatter_efficiency_db: 10.0,
            noise_floor_dbm: -90.0,
            carrier_freq_hz: 2.426e9,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("d1_m", self.d1_m), ("d2_m", self.d2_m), ("d3_m", self.d3_m)] {
            if !(d > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {d}")));
            }
        }
        if !(1.6..=4.0).contains(&self.path_loss_exponent) {
            return Err(Error::InvalidParameter(format!(
                "path-loss exponent {} outside [1.6, 4]",
                self.path_loss_exponent
            )));
        }
        if !(self.carrier_freq_hz > 0.0) {
            return Err(Error::InvalidParameter("carrier frequency must be positive".into()));
        }
        Ok(())
    }

    pub fn path_loss_db(&self, d_m: f64) -> f64 {
        path_loss_db(d_m, self.carrier_freq_hz, self.path_loss_exponent)
    }
}

/// Log-distance path loss with a 1 m free-space reference.
pub fn path_loss_db(d_m: f64, freq_hz: f64, exponent: f64) -> f64 {
    20.0 * (4.0 * PI * freq_hz / SPEED_OF_LIGHT).log10() + 10.0 * exponent * d_m.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RxPower {
    pub at_tag_dbm: f64,
    pub at_receiver_dbm: f64,
    pub direct_carrier_dbm: f64,
    pub snr_db: f64,
}

pub fn rx_power(b: &LinkBudget) -> Result<RxPower> {
    b.validate()?;
    let at_tag = b.tx_power_dbm - b.path_loss_db(b.d1_m);
    let at_rx = at_tag - b.backscatter_efficiency_db - b.path_loss_db(b.d2_m);
    Ok(RxPower {
        at_tag_dbm: at_tag,
        at_receiver_dbm: at_rx,
        direct_carrier_dbm: b.tx_power_dbm - b.path_loss_db(b.d3_m),
        snr_db: at_rx - b.noise_floor_dbm,
    })
}

/// Mean power over the nonzero samples, so zero padding does not dilute it.
pub fn active_power(samples: &[Sample]) -> f64 {
    let (sum, n) =
        samples.iter().map(|s| s.norm_sqr()).filter(|&p| p > 0.0).fold((0.0, 0usize), |(s, n), p| (s + p, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Add complex Gaussian noise of total power `noise_power` (split evenly
/// between I and Q).
pub fn add_noise<R: Rng + ?Sized>(buf: &IqBuffer, noise_power: f64, rng: &mut R) -> IqBuffer {
    let sigma = (noise_power / 2.0).sqrt();
    let samples = buf
        .samples
        .iter()
        .map(|&s| {
            let n = Sample::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            s + n * sigma
        })
        .collect();
    IqBuffer { samples, ..buf.clone() }
}

/// Noise at `snr_db` below the buffer's mean power.
pub fn awgn<R: Rng + ?Sized>(buf: &IqBuffer, snr_db: f64, rng: &mut R) -> Result<IqBuffer> {
    let p = buf.power();
    if p == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(add_noise(buf, p / from_db(snr_db), rng))
}

/// Noise for a per-symbol SNR (Es/N0 or Ec/N0) when each symbol spans
/// `samples_per_symbol` samples; the reference power is the active power.
pub fn awgn_per_symbol<R: Rng + ?Sized>(
    buf: &IqBuffer,
    snr_db: f64,
    samples_per_symbol: usize,
    rng: &mut R,
) -> Result<IqBuffer> {
    let p = active_power(&buf.samples);
    if p == 0.0 {
        return Err(Error::ZeroPower);
    }
    let per_sample = snr_db - to_db(samples_per_symbol as f64);
    Ok(add_noise(buf, p / from_db(per_sample), rng))
}

/// Independent, reproducible RNG for one trial of one experiment.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

/// Receiver-band signal: reflection scaled to the received power, the
/// direct-path carrier scaled to its own power, plus thermal noise.
/// Both inputs are normalised by their active power first; `carrier`
/// must already sit at its offset from the receiver channel.
pub fn compose_scene<R: Rng + ?Sized>(
    carrier: &IqBuffer,
    reflected: &IqBuffer,
    budget: &LinkBudget,
    rng: &mut R,
) -> Result<IqBuffer> {
    if carrier.sample_rate != reflected.sample_rate {
        return Err(Error::SampleRateMismatch(format!(
            "carrier at {} Hz, reflection at {} Hz",
            carrier.sample_rate, reflected.sample_rate
        )));
    }
    if carrier.len() != reflected.len() {
        return Err(Error::InvalidParameter(format!(
            "carrier has {} samples, reflection {}",
            carrier.len(),
            reflected.len()
        )));
    }
    let p = rx_power(budget)?;
    let gain = |buf: &IqBuffer, dbm: f64| {
        let a = active_power(&buf.samples);
        if a == 0.0 {
            0.0
        } else {
            (from_db(dbm) / a).sqrt()
        }
    };
    let gr = gain(reflected, p.at_receiver_dbm);
    let gc = gain(carrier, p.direct_carrier_dbm);
    let mixed = IqBuffer {
        samples: reflected.samples.iter().zip(&carrier.samples).map(|(r, c)| r * gr + c * gc).collect(),
        ..reflected.clone()
    };
    Ok(add_noise(&mixed, from_db(budget.noise_floor_dbm), rng))
}

/// A link scenario read from a `key=value` file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub budget: LinkBudget,
    pub seed: u64,
}

impl Scenario {
    pub const KEYS: [&'static str; 9] =
        ["tx_power_dbm", "d1_m", "d2_m", "d3_m", "exponent", "eta_db", "noise_floor_dbm", "carrier_freq_hz", "seed"];

    pub fn from_config(c: &KvConfig) -> Result<Self> {
        c.reject_unknown(&Self::KEYS)?;
        let mut b = LinkBudget::default();
        let fields: [(&str, &mut f64); 8] = [
            ("tx_power_dbm", &mut b.tx_power_dbm),
            ("d1_m", &mut b.d1_m),
            ("d2_m", &mut b.d2_m),
            ("d3_m", &mut b.d3_m),
            ("exponent", &mut b.path_loss_exponent),
            ("eta_db", &mut b.backscatter_efficiency_db),
            ("noise_floor_dbm", &mut b.noise_floor_dbm),
            ("carrier_freq_hz", &mut b.carrier_freq_hz),
        ];
        for (key, slot) in fields {
            if let Some(v) = c.get_parsed(key)? {
                *slot = v;
            }
        }
        b.validate()?;
        Ok(Self { budget: b, seed: c.get_parsed("seed")?.unwrap_or(0) })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_config(&KvConfig::parse(text)?)
    }
}
