use super::chain::tone_advert;
use super::{fmt_f, Outcome, Params, Table};
use crate::ble::{build_advertising_packet, gfsk_modulate, BleChannel, BleConfig, Polarity, MAX_ADV_PAYLOAD};
use crate::channel::trial_rng;
use crate::error::{Error, Result};
use crate::sigcore::{periodogram, Spectrum};
use rand::Rng;

pub(super) const KEYS: &[(&str, &str)] =
    &[("channel", "38"), ("polarity", "ones"), ("mode", "tone"), ("sample_rate", "8e6"), ("nfft", "2048")];

pub(super) fn spectrum_table(file: &str, s: &Spectrum) -> Table {
    let mut t = Table::new(file, &["freq_hz", "power_db"]);
    for (f, p) in s.bin_freqs.iter().zip(&s.power_db) {
        t.push(vec![fmt_f(*f, 1), fmt_f(*p, 4)]);
    }
    t
}

pub(super) fn run(p: &Params) -> Result<Outcome> {
    let channel = BleChannel::new(p.get("channel")?)?;
    if !channel.is_advertising() {
        return Err(Error::BadChannel(channel.index() as u32));
    }
    let polarity: Polarity = p.str("polarity").parse()?;
    let fs: f64 = p.get("sample_rate")?;
    let nfft: usize = p.get("nfft")?;
    let mut out = p.outcome();

    let (iq, tone) = match p.str("mode") {
        "tone" => {
            let a = tone_advert(channel, polarity, fs)?;
            (a.iq.clone(), Some(a.tone_segment()))
        }
        "random" => {
            let mut rng = trial_rng(p.seed()?, 0);
            let payload: Vec<u8> = (0..MAX_ADV_PAYLOAD).map(|_| rng.gen()).collect();
            let (_, bits) = build_advertising_packet(channel, &payload, &BleConfig::default())?;
            (gfsk_modulate(&bits, fs)?, None)
        }
        m => return Err(Error::Parse(format!("mode must be tone or random, got {m:?}"))),
    };
    let s = periodogram(&iq, nfft)?;
    out.note("peak_hz", fmt_f(s.peak_freq(), 1));
    out.note("bw20_hz", fmt_f(s.bandwidth_below_peak(20.0), 1));
    if let Some(seg) = tone {
        let ts = periodogram(&seg, nfft.min(seg.len() / 2 * 2))?;
        let f0 = polarity.tone_offset();
        out.note("tone_fraction", fmt_f(ts.band_fraction(f0 - 100e3, f0 + 100e3), 4));
    }
    out.tables.push(spectrum_table("tone_spectrum.csv", &s));
    out.iq.push(("tone.iq".into(), iq));
    Ok(out)
}
