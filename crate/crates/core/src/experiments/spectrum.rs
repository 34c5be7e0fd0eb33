use super::tone::spectrum_table;
use super::{fmt_f, Outcome, Params};
use crate::error::{Error, Result};
use crate::sigcore::{periodogram, read_iq};
use std::path::Path;

pub(super) const KEYS: &[(&str, &str)] = &[("input", ""), ("nfft", "4096")];

pub(super) fn run(p: &Params) -> Result<Outcome> {
    let input = p.str("input");
    if input.is_empty() {
        return Err(Error::Parse("spectrum needs input=<file.iq>".into()));
    }
    let (buf, _) = read_iq(Path::new(input))?;
    let s = periodogram(&buf, p.get("nfft")?)?;
    let mut out = p.outcome();
    out.note("samples", buf.len());
    out.note("peak_hz", fmt_f(s.peak_freq(), 1));
    out.note("bw20_hz", fmt_f(s.bandwidth_below_peak(20.0), 1));
    out.tables.push(spectrum_table("spectrum.csv", &s));
    Ok(out)
}
