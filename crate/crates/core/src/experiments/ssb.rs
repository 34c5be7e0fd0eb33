use super::chain::tone_advert;
use super::{fmt_f, Outcome, Params, Table};
use crate::ble::{BleChannel, Polarity};
use crate::channel::trial_rng;
use crate::error::{Error, Result};
use crate::sigcore::{periodogram, to_db, Sample, Spectrum, WIFI_CHIP_RATE};
use crate::ssbmod::{apply_backscatter, dsb_backscatter, FrequencyPlan};
use crate::wifi11b::{synthesize_packet, Rate, TxOptions};
use rand::Rng;

pub(super) const KEYS: &[(&str, &str)] = &[
    ("delta_f", "35.75e6"),
    ("signal", "packet"),
    ("rate", "2"),
    ("payload_len", "31"),
    ("channel", "38"),
    ("polarity", "ones"),
    ("eta", "0.5"),
    ("nfft", "8192"),
    ("samples_per_state", "8"),
];

fn band_db(s: &Spectrum, center: f64, half: f64) -> f64 {
    to_db(s.band_fraction(center - half, center + half))
}

pub(super) fn run(p: &Params) -> Result<Outcome> {
    let df: f64 = p.get("delta_f")?;
    let plan = FrequencyPlan::wifi(df)?;
    let polarity: Polarity = p.str("polarity").parse()?;
    let per_state: usize = p.get("samples_per_state")?;
    if per_state == 0 {
        return Err(Error::InvalidParameter("samples_per_state must be positive".into()));
    }
    let fs = 4.0 * df.abs() * per_state as f64;
    let advert = tone_advert(BleChannel::new(p.get("channel")?)?, polarity, fs)?;
    let eta: f64 = p.get("eta")?;
    let nfft: usize = p.get("nfft")?;
    let start = advert.detection.backscatter_start_s;
    let f0 = polarity.tone_offset();

    let (symbols, packet) = match p.str("signal") {
        "tone" => {
            let n = (advert.usable_tone_s() * WIFI_CHIP_RATE) as usize;
            (vec![Sample::new(1.0, 0.0); n], false)
        }
        "packet" => {
            let mut rng = trial_rng(p.seed()?, 0);
            let len: usize = p.get("payload_len")?;
            let payload: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let rate = Rate::from_mbps(p.get("rate")?)?;
            (synthesize_packet(&payload, rate, &TxOptions::advert())?.0, true)
        }
        s => return Err(Error::Parse(format!("signal must be tone or packet, got {s:?}"))),
    };
    let span = |buf: &crate::sigcore::IqBuffer| {
        let a = (start * buf.sample_rate).round() as usize;
        let b = a + symbols.len() * (buf.sample_rate / WIFI_CHIP_RATE) as usize;
        buf.slice(a, b.min(buf.len()))
    };
    let ssb = span(&apply_backscatter(&advert.iq, &plan, &symbols, WIFI_CHIP_RATE, start, eta)?);
    let dsb = span(&dsb_backscatter(&advert.iq, df, &symbols, WIFI_CHIP_RATE, start, eta)?);
    let (s, d) = (periodogram(&ssb, nfft)?, periodogram(&dsb, nfft)?);

    let mut out = p.outcome();
    let (up, image) = (f0 + df, f0 - df);
    if packet {
        let half = 11e6;
        out.note("ssb_image_rejection_db", fmt_f(band_db(&s, up, half) - band_db(&s, image, half), 2));
        out.note("dsb_sideband_delta_db", fmt_f(band_db(&d, up, half) - band_db(&d, image, half), 2));
        let (rs, rd) = (band_db(&s, up, half), band_db(&d, up, half));
        let shape = s
            .bin_freqs
            .iter()
            .enumerate()
            .filter(|(_, f)| (**f - up).abs() <= 8e6)
            .map(|(k, _)| ((s.power_db[k] - rs) - (d.power_db[k] - rd)).abs())
            .fold(0.0, f64::max);
        out.note("mainlobe_shape_diff_db", fmt_f(shape, 2));
    } else {
        let line = |sp: &Spectrum, f: f64| sp.line_db(f, 3);
        let main = line(&s, up);
        out.note("ssb_image_rejection_db", fmt_f(main - line(&s, image), 2));
        out.note("ssb_spur3_db", fmt_f(main - line(&s, f0 - 3.0 * df), 2));
        out.note("ssb_spur5_db", fmt_f(main - line(&s, f0 + 5.0 * df), 2));
        out.note("dsb_sideband_delta_db", fmt_f(line(&d, up) - line(&d, image), 2));
    }

    let mut t = Table::new("ssb_compare.csv", &["freq_hz", "ssb_db", "dsb_db"]);
    for k in 0..s.len() {
        t.push(vec![fmt_f(s.bin_freqs[k], 1), fmt_f(s.power_db[k], 4), fmt_f(d.power_db[k], 4)]);
    }
    out.tables.push(t);
    Ok(out)
}
