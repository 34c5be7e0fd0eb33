use super::chain::{zigbee_front_end, zigbee_uplink, ZIGBEE_RX_RATE};
use super::{fmt_f, per_summary, Outcome, Params, Table};
use crate::ble::{BleChannel, Polarity};
use crate::channel::{awgn_per_symbol, trial_rng};
use crate::error::{Error, Result};
use crate::zigbee::{zigbee_decode, CHIP_RATE, MAX_PAYLOAD};
use rand::Rng;
use rayon::prelude::*;

pub(super) const KEYS: &[(&str, &str)] = &[
    ("channel", "14"),
    ("ble_channel", "38"),
    ("polarity", "ones"),
    ("payload_hex", ""),
    ("payload_len", "20"),
    ("snr_db", "30"),
    ("trials", "100"),
    ("eta", "0.5"),
];

pub(super) fn run(p: &Params) -> Result<Outcome> {
    let zb_channel: u32 = p.get("channel")?;
    let ble = BleChannel::new(p.get("ble_channel")?)?;
    let polarity: Polarity = p.str("polarity").parse()?;
    let fixed = p.hex("payload_hex")?;
    let len = fixed.as_ref().map_or(p.get("payload_len")?, Vec::len);
    if len > MAX_PAYLOAD {
        return Err(Error::PayloadTooLarge { len, max: MAX_PAYLOAD });
    }
    let eta: f64 = p.get("eta")?;
    let points = p.sweep("snr_db")?;
    let trials: usize = p.get("trials")?;
    let seed = p.seed()?;
    let sps = (ZIGBEE_RX_RATE / CHIP_RATE) as usize;

    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let results: Vec<(usize, usize, bool, f64, f64)> = jobs
        .par_iter()
        .map(|&(point, trial)| {
            let mut rng = trial_rng(seed, (point * trials + trial) as u64);
            let payload: Vec<u8> = match &fixed {
                Some(b) => b.clone(),
                None => (0..len).map(|_| rng.gen()).collect(),
            };
            let up = zigbee_uplink(ble, polarity, zb_channel, &payload, eta)?;
            let mut rx = zigbee_front_end(&up.reflected, up.rx_offset_hz)?;
            if points[point].is_finite() {
                rx = awgn_per_symbol(&rx, points[point], sps, &mut rng)?;
            }
            Ok(match zigbee_decode(&rx) {
                Ok(d) => (point, trial, d.crc_ok && d.payload == payload, d.rssi_db, d.carrier_offset_hz),
                Err(_) => (point, trial, false, f64::NAN, f64::NAN),
            })
        })
        .collect::<Result<_>>()?;

    let mut out = p.outcome();
    let mut table = Table::new("zigbee_trials.csv", &["snr_db", "trial", "ok", "rssi_db", "cfo_hz"]);
    for &(point, trial, ok, rssi, cfo) in &results {
        table.push(vec![
            fmt_f(points[point], 2),
            trial.to_string(),
            (ok as u8).to_string(),
            fmt_f(rssi, 2),
            fmt_f(cfo, 0),
        ]);
    }
    let per = per_summary("zigbee_per.csv", &points, &results.iter().map(|r| (r.0, r.2, r.3)).collect::<Vec<_>>());
    for (snr, v) in points.iter().zip(per.column("per").unwrap_or_default()) {
        out.note(&format!("per@{}dB", fmt_f(*snr, 2)), v);
    }
    out.tables.push(table);
    out.tables.push(per);
    Ok(out)
}
