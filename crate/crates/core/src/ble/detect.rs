use crate::error::{Error, Result};

/// Preamble + access address + header airtime at 1 Mbps.
pub const PAYLOAD_OFFSET_S: f64 = 56e-6;
/// Margin added after the payload-start estimate before switching begins.
pub const GUARD_S: f64 = 4e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// First threshold crossing.
    pub crossing_s: f64,
    /// Estimated start of the advertising payload.
    pub payload_start_s: f64,
    /// When the tag should start backscattering.
    pub backscatter_start_s: f64,
}

/// Energy detection on an envelope sampled at `sample_rate`.
pub fn detect_packet_start(envelope: &[f64], sample_rate: f64, threshold: f64) -> Result<Detection> {
    if !(sample_rate > 0.0) {
        return Err(Error::InvalidParameter(format!("sample rate {sample_rate}")));
    }
    let idx = envelope.iter().position(|&e| e >= threshold && e > 0.0).ok_or(Error::NoPacketDetected)?;
    let crossing_s = idx as f64 / sample_rate;
    let payload_start_s = crossing_s + PAYLOAD_OFFSET_S;
    Ok(Detection { crossing_s, payload_start_s, backscatter_start_s: payload_start_s + GUARD_S })
}
