use super::chain::{tone_advert, wifi_front_end, wifi_uplink, with_carrier, UPLINK_RATE, WIFI_RX_RATE};
use super::{fmt_f, per_summary, Outcome, Params, Table};
use crate::ble::{BleChannel, Polarity};
use crate::channel::{awgn_per_symbol, trial_rng};
use crate::error::{Error, Result};
use crate::macproto::max_payload_bytes;
use crate::sigcore::{IqBuffer, WIFI_CHIP_RATE};
use crate::ssbmod::FrequencyPlan;
use crate::wifi11b::{decode_packet, PreambleMode, Rate, TxOptions, FCS_LEN};
use rand::Rng;
use rayon::prelude::*;

pub(super) const KEYS: &[(&str, &str)] = &[
    ("rate", "2"),
    ("payload_hex", ""),
    ("payload_len", "31"),
    ("delta_f", "35.75e6"),
    ("snr_db", "30"),
    ("trials", "100"),
    ("channel", "38"),
    ("polarity", "ones"),
    ("eta", "0.5"),
    ("carrier_db", "none"),
    ("advert_window", "true"),
];

struct Trial {
    point: usize,
    trial: usize,
    payload_len: usize,
    decoded: bool,
    crc_ok: bool,
    bit_errors: usize,
    rssi_db: f64,
}

fn bit_errors(a: &[u8], b: &[u8]) -> usize {
    if a.len() != b.len() {
        return 8 * a.len().max(b.len());
    }
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones() as usize).sum()
}

pub(super) fn run(p: &Params) -> Result<Outcome> {
    let rate = Rate::from_mbps(p.get("rate")?)?;
    let windowed: bool = p.get("advert_window")?;
    let fixed = p.hex("payload_hex")?;
    let len = fixed.as_ref().map_or(p.get("payload_len")?, Vec::len);
    let opts = if windowed {
        let max = max_payload_bytes(rate.mbps())? - FCS_LEN;
        if len > max {
            return Err(Error::PayloadTooLarge { len, max });
        }
        TxOptions::advert()
    } else {
        TxOptions { preamble: PreambleMode::Long, ..TxOptions::default() }
    };
    let plan = FrequencyPlan::wifi(p.get("delta_f")?)?;
    let channel = BleChannel::new(p.get("channel")?)?;
    let polarity: Polarity = p.str("polarity").parse()?;
    let eta: f64 = p.get("eta")?;
    let carrier_db: Option<f64> = match p.str("carrier_db") {
        "none" | "" => None,
        _ => Some(p.get("carrier_db")?),
    };
    let points = p.sweep("snr_db")?;
    let trials: usize = p.get("trials")?;
    let seed = p.seed()?;
    let advert = tone_advert(channel, polarity, UPLINK_RATE)?;

    let one = |point: usize, trial: usize, keep: bool| -> Result<(Trial, Option<IqBuffer>)> {
        let mut rng = trial_rng(seed, (point * trials + trial) as u64);
        let payload: Vec<u8> = match &fixed {
            Some(b) => b.clone(),
            None => (0..len).map(|_| rng.gen()).collect(),
        };
        let up = wifi_uplink(&advert, &payload, rate, &opts, &plan, eta)?;
        let band = match carrier_db {
            Some(c) => with_carrier(&up.reflected, &advert.iq, c)?,
            None => up.reflected,
        };
        let mut rx = wifi_front_end(&band, up.rx_offset_hz)?;
        if points[point].is_finite() {
            rx = awgn_per_symbol(&rx, points[point], (WIFI_RX_RATE / WIFI_CHIP_RATE) as usize, &mut rng)?;
        }
        let (decoded, crc_ok, errs, rssi) = match decode_packet(&rx) {
            Ok(d) => (true, d.crc_ok, bit_errors(&d.payload, &payload), d.rssi_db),
            Err(_) => (false, false, 8 * payload.len(), f64::NAN),
        };
        let t = Trial { point, trial, payload_len: payload.len(), decoded, crc_ok, bit_errors: errs, rssi_db: rssi };
        Ok((t, keep.then_some(rx)))
    };

    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let results: Vec<(Trial, Option<IqBuffer>)> =
        jobs.par_iter().map(|&(i, t)| one(i, t, i == 0 && t == 0)).collect::<Result<_>>()?;

    let mut out = p.outcome();
    let mut table = Table::new(
        "uplink_trials.csv",
        &["snr_db", "trial", "payload_len", "decoded", "crc_ok", "bit_errors", "rssi_db"],
    );
    let mut summary_in = Vec::with_capacity(results.len());
    for (t, iq) in results {
        table.push(vec![
            fmt_f(points[t.point], 2),
            t.trial.to_string(),
            t.payload_len.to_string(),
            (t.decoded as u8).to_string(),
            (t.crc_ok as u8).to_string(),
            t.bit_errors.to_string(),
            fmt_f(t.rssi_db, 2),
        ]);
        summary_in.push((t.point, t.crc_ok && t.bit_errors == 0, t.rssi_db));
        if let Some(iq) = iq {
            out.iq.push(("uplink_rx.iq".into(), iq));
        }
    }
    let per = per_summary("uplink_per.csv", &points, &summary_in);
    for (snr, v) in points.iter().zip(per.column("per").unwrap_or_default()) {
        out.note(&format!("per@{}dB", fmt_f(*snr, 2)), v);
    }
    out.tables.push(table);
    out.tables.push(per);
    Ok(out)
}
