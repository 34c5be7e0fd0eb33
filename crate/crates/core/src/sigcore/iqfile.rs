//! Raw IQ files: little-endian interleaved f32 (I, Q) pairs, plus a
//! `<file>.meta` sidecar of `key=value` lines.

use super::{IqBuffer, Sample};
use crate::error::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct IqMeta {
    pub sample_rate_hz: f64,
    pub center_freq_hz: f64,
    pub created_by: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn write_iq(path: &Path, buf: &IqBuffer, created_by: &str) -> Result<()> {
    let mut bytes = Vec::with_capacity(buf.len() * 8);
    for s in &buf.samples {
        bytes.extend_from_slice(&(s.re as f32).to_le_bytes());
        bytes.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    fs::write(path, bytes)?;
    let meta = format!(
        "sample_rate_hz={}\ncenter_freq_hz={}\ncreated_by={}\n",
        buf.sample_rate,
        buf.center_freq,
        created_by.replace('\n', " ")
    );
    fs::write(sidecar_path(path), meta)?;
    Ok(())
}

pub fn read_iq(path: &Path) -> Result<(IqBuffer, IqMeta)> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse(format!(
            "{}: length {} is not a whole number of f32 pairs",
            path.display(),
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| {
            let i = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let q = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Sample::new(i as f64, q as f64)
        })
        .collect();

    let text = fs::read_to_string(sidecar_path(path))?;
    let mut rate = None;
    let mut center = None;
    let mut created_by = String::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("bad metadata line {line:?}")))?;
        match k.trim() {
            "sample_rate_hz" => rate = Some(parse_f64(v)?),
            "center_freq_hz" => center = Some(parse_f64(v)?),
            "created_by" => created_by = v.to_string(),
            other => return Err(Error::Parse(format!("unknown metadata key {other:?}"))),
        }
    }
    let meta = IqMeta {
        sample_rate_hz: rate.ok_or_else(|| Error::Parse("missing sample_rate_hz".into()))?,
        center_freq_hz: center.ok_or_else(|| Error::Parse("missing center_freq_hz".into()))?,
        created_by,
    };
    let buf = IqBuffer::new(samples, meta.sample_rate_hz, meta.center_freq_hz)?;
    Ok((buf, meta))
}

fn parse_f64(v: &str) -> Result<f64> {
    v.trim().parse().map_err(|_| Error::Parse(format!("not a number: {v:?}")))
}
