//! Reproducible experiment drivers behind the `bsim` subcommands.
//!
//! Every driver takes a flat `key=value` parameter set, fills in defaults,
//! rejects unknown keys, and returns tables (CSV) plus optional IQ
//! captures. Trials draw from [`trial_rng`](crate::channel::trial_rng)
//! streams keyed by (seed, trial), so the worker pool never changes output.

pub mod chain;
mod downlink;
mod mac;
mod spectrum;
mod ssb;
mod tone;
mod uplink;
mod zigbee;

use crate::config::KvConfig;
use crate::error::{Error, Result};
use crate::sigcore::{write_iq, IqBuffer};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Subcommand names in display order.
pub const EXPERIMENTS: [&str; 7] = ["tone", "uplink", "ssb-compare", "downlink", "zigbee", "mac", "spectrum"];

type Driver = fn(&Params) -> Result<Outcome>;

fn lookup(name: &str) -> Option<(&'static [(&'static str, &'static str)], Driver)> {
    Some(match name {
        "tone" => (tone::KEYS, tone::run),
        "uplink" => (uplink::KEYS, uplink::run),
        "ssb-compare" => (ssb::KEYS, ssb::run),
        "downlink" => (downlink::KEYS, downlink::run),
        "zigbee" => (zigbee::KEYS, zigbee::run),
        "mac" => (mac::KEYS, mac::run),
        "spectrum" => (spectrum::KEYS, spectrum::run),
        _ => return None,
    })
}

/// Default parameters of `name`, including `seed`.
pub fn defaults(name: &str) -> Result<KvConfig> {
    let (keys, _) = lookup(name).ok_or_else(|| Error::Parse(format!("unknown experiment {name:?}")))?;
    let mut c = KvConfig::default();
    c.insert("seed", 1);
    for (k, v) in keys {
        c.insert(k, v);
    }
    Ok(c)
}

/// Resolve `layers` (lowest precedence first) over the defaults and check
/// that every key is known. Errors here are usage errors.
pub fn resolve(name: &str, layers: &[&KvConfig]) -> Result<KvConfig> {
    let base = defaults(name)?;
    let allowed: Vec<&str> = base.iter().map(|(k, _)| k).collect();
    let mut out = base.clone();
    for layer in layers {
        layer.reject_unknown(&allowed)?;
        out = out.merged(layer);
    }
    Ok(out)
}

/// Run experiment `name` with fully resolved parameters.
pub fn run(name: &str, resolved: &KvConfig) -> Result<Outcome> {
    let (_, driver) = lookup(name).ok_or_else(|| Error::Parse(format!("unknown experiment {name:?}")))?;
    let params = Params { name, cfg: resolved.clone() };
    driver(&params)
}

/// Typed view over resolved parameters.
pub struct Params<'a> {
    name: &'a str,
    cfg: KvConfig,
}

impl Params<'_> {
    pub fn str(&self, key: &str) -> &str {
        self.cfg.get(key).unwrap_or("")
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        self.cfg.get_parsed(key)?.ok_or_else(|| Error::Parse(format!("{}: missing {key}", self.name)))
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("seed")
    }

    pub fn sweep(&self, key: &str) -> Result<Vec<f64>> {
        parse_sweep(self.str(key))
    }

    pub fn list(&self, key: &str) -> Vec<&str> {
        self.str(key).split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
    }

    pub fn hex(&self, key: &str) -> Result<Option<Vec<u8>>> {
        let s = self.str(key);
        if s.is_empty() {
            Ok(None)
        } else {
            parse_hex(s).map(Some)
        }
    }

    fn outcome(&self) -> Outcome {
        Outcome {
            name: self.name.to_string(),
            resolved: self.cfg.clone(),
            tables: Vec::new(),
            iq: Vec::new(),
            summary: Vec::new(),
        }
    }
}

/// `start:stop:step` (inclusive), a comma list, or one value.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("bad sweep {s:?}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(bad());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

pub fn parse_hex(s: &str) -> Result<Vec<u8>> {
    let s = s.trim().trim_start_matches("0x");
    if !s.len().is_multiple_of(2) {
        return Err(Error::Parse(format!("odd-length hex {s:?}")));
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).map_err(|_| Error::Parse(format!("bad hex {s:?}"))))
        .collect()
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Fixed-precision float for stable CSV output.
pub fn fmt_f(v: f64, digits: usize) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let s = format!("{v:.digits$}");
        if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
            s[1..].to_string()
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, columns: &[&'static str]) -> Self {
        Self { file: file.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Comment line with the resolved configuration, header, rows.
    pub fn to_csv(&self, experiment: &str, resolved: &KvConfig) -> String {
        let mut out = format!("# bsim {experiment} {}\n", resolved.to_line());
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: String,
    pub resolved: KvConfig,
    pub tables: Vec<Table>,
    pub iq: Vec<(String, IqBuffer)>,
    /// Headline numbers, printed as `key: value` lines.
    pub summary: Vec<(String, String)>,
}

impl Outcome {
    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn summary_text(&self) -> String {
        self.summary.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }

    /// Write every table and capture into `dir`; returns the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for t in &self.tables {
            let p = dir.join(&t.file);
            std::fs::write(&p, t.to_csv(&self.name, &self.resolved))?;
            paths.push(p);
        }
        for (file, buf) in &self.iq {
            let p = dir.join(file);
            write_iq(&p, buf, &format!("bsim {} {}", self.name, self.resolved.to_line()))?;
            paths.push(p);
        }
        Ok(paths)
    }
}

/// Packet error rate and mean RSSI per sweep point.
fn per_summary(file: &str, points: &[f64], results: &[(usize, bool, f64)]) -> Table {
    let mut t = Table::new(file, &["snr_db", "trials", "packet_errors", "per", "mean_rssi_db"]);
    for (i, &snr) in points.iter().enumerate() {
        let rows: Vec<&(usize, bool, f64)> = results.iter().filter(|r| r.0 == i).collect();
        let errors = rows.iter().filter(|r| !r.1).count();
        let rssi: Vec<f64> = rows.iter().filter(|r| r.1).map(|r| r.2).collect();
        let mean = if rssi.is_empty() { f64::NAN } else { rssi.iter().sum::<f64>() / rssi.len() as f64 };
        t.push(vec![
            fmt_f(snr, 2),
            rows.len().to_string(),
            errors.to_string(),
            fmt_f(errors as f64 / rows.len().max(1) as f64, 4),
            fmt_f(mean, 2),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps() {
        assert_eq!(parse_sweep("0:12:3").unwrap(), vec![0.0, 3.0, 6.0, 9.0, 12.0]);
        assert_eq!(parse_sweep("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_sweep("6").unwrap(), vec![6.0]);
        assert_eq!(parse_sweep("1, 4,inf").unwrap(), vec![1.0, 4.0, f64::INFINITY]);
        assert!(parse_sweep("3:1:1").is_err());
        assert!(parse_sweep("a").is_err());
    }

    #[test]
    fn hex_round_trip() {
        assert_eq!(parse_hex("0xdeadBEEF").unwrap(), vec![0xde, 0xad, 0xbe, 0xef]);
        assert_eq!(to_hex(&[1, 0xab]), "01ab");
        assert!(parse_hex("abc").is_err());
    }

    #[test]
    fn resolution_order_and_unknown_keys() {
        let file = KvConfig::parse("trials=7\nrate=11").unwrap();
        let flags = KvConfig::parse("rate=5.5").unwrap();
        let r = resolve("uplink", &[&file, &flags]).unwrap();
        assert_eq!(r.get("trials"), Some("7"));
        assert_eq!(r.get("rate"), Some("5.5"));
        let bogus = KvConfig::parse("colour=red").unwrap();
        assert!(matches!(resolve("uplink", &[&bogus]), Err(Error::Parse(_))));
        assert!(resolve("nope", &[]).is_err());
        for e in EXPERIMENTS {
            assert_eq!(defaults(e).unwrap().get("seed"), Some("1"));
        }
    }

    #[test]
    fn stable_float_format() {
        assert_eq!(fmt_f(-0.00001, 3), "0.000");
        assert_eq!(fmt_f(1.23456, 2), "1.23");
        assert_eq!(fmt_f(f64::NEG_INFINITY, 1), "-inf");
    }

    fn quick(name: &str, kv: &str) -> Outcome {
        let r = resolve(name, &[&KvConfig::parse(&kv.replace(' ', "\n")).unwrap()]).unwrap();
        run(name, &r).unwrap()
    }

    #[test]
    fn tone_experiment_reports_a_clean_line() {
        let o = quick("tone", "nfft=2048");
        let frac: f64 = o.summary_value("tone_fraction").unwrap().parse().unwrap();
        assert!(frac > 0.99, "{frac}");
        assert!(o.table("tone_spectrum.csv").is_some());
    }

    #[test]
    fn uplink_experiment_decodes_without_noise() {
        let o = quick("uplink", "trials=3 snr_db=inf payload_len=10");
        assert_eq!(o.summary_value("per@infdB"), Some("0.0000"));
        assert_eq!(o.iq.len(), 1);
    }

    #[test]
    fn ssb_compare_separates_the_sidebands() {
        let o = quick("ssb-compare", "signal=tone");
        let rej: f64 = o.summary_value("ssb_image_rejection_db").unwrap().parse().unwrap();
        let dsb: f64 = o.summary_value("dsb_sideband_delta_db").unwrap().parse().unwrap();
        assert!(rej > 20.0, "{rej}");
        assert!(dsb.abs() < 0.5, "{dsb}");
        let spur = |k: &str| o.summary_value(k).unwrap().parse::<f64>().unwrap();
        assert!((spur("ssb_spur3_db") - 9.5).abs() <= 1.0);
        assert!((spur("ssb_spur5_db") - 14.0).abs() <= 1.0);
        let p = quick("ssb-compare", "signal=packet");
        let v = |k: &str| p.summary_value(k).unwrap().parse::<f64>().unwrap();
        assert!(v("ssb_image_rejection_db") >= 15.0);
        assert!(v("dsb_sideband_delta_db").abs() <= 0.5);
        assert!(v("mainlobe_shape_diff_db") <= 1.0);
    }

    #[test]
    fn downlink_experiment_runs() {
        let o = quick("downlink", "n_bits=64 trials=2 snr_db=inf");
        println!("{}", o.summary_text());
        assert_eq!(o.summary_value("envelope_ber@infdB"), Some("0.00000"));
        assert_eq!(o.table("downlink_ber.csv").unwrap().column("ofdm_ber").unwrap(), vec!["0.000000"]);
    }

    #[test]
    fn zigbee_experiment_decodes_without_noise() {
        let o = quick("zigbee", "trials=2 snr_db=inf");
        assert_eq!(o.summary_value("per@infdB"), Some("0.0000"));
    }

    #[test]
    fn mac_experiment_covers_every_strategy() {
        let o = quick("mac", "loads=0.3 runs=1 duration_s=3");
        println!("{}", o.summary_text());
        assert_eq!(o.table("mac_summary.csv").unwrap().rows.len(), 4);
    }
}
