use super::Rate;
use crate::error::{Error, Result};
use crate::sigcore::Sample;

pub const BARKER: [f64; 11] = [1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0];

/// Phase in quarter turns; chips are `j^q`.
pub(crate) fn quarter(q: u8) -> Sample {
    match q & 3 {
        0 => Sample::new(1.0, 0.0),
        1 => Sample::new(0.0, 1.0),
        2 => Sample::new(-1.0, 0.0),
        _ => Sample::new(0.0, -1.0),
    }
}

/// DQPSK dibit (first bit, second bit) to phase step in quarter turns.
pub(crate) fn dqpsk_step(d0: u8, d1: u8) -> u8 {
    match (d0 & 1, d1 & 1) {
        (0, 0) => 0,
        (0, 1) => 1,
        (1, 1) => 2,
        _ => 3,
    }
}

pub(crate) fn dqpsk_bits(step: u8) -> [u8; 2] {
    match step & 3 {
        0 => [0, 0],
        1 => [0, 1],
        2 => [1, 1],
        _ => [1, 0],
    }
}

/// Barker-spread DBPSK (1 Mbps) or DQPSK (2 Mbps) symbols.
///
/// `phase` is the running carrier phase in quarter turns; it is read as the
/// reference and updated to the last symbol's phase.
pub fn barker_spread_from(bits: &[u8], rate: Rate, phase: &mut u8) -> Result<Vec<Sample>> {
    let steps: Vec<u8> = match rate {
        Rate::R1 => bits.iter().map(|&b| if b & 1 == 1 { 2 } else { 0 }).collect(),
        Rate::R2 => {
            if !bits.len().is_multiple_of(2) {
                return Err(Error::OddBitCount(bits.len()));
            }
            bits.chunks(2).map(|c| dqpsk_step(c[0], c[1])).collect()
        }
        other => {
            return Err(Error::InvalidParameter(format!("Barker spreading is only used at 1 and 2 Mbps, not {other}")))
        }
    };
    let mut chips = Vec::with_capacity(steps.len() * 11);
    for s in steps {
        *phase = (*phase + s) & 3;
        let rot = quarter(*phase);
        chips.extend(BARKER.iter().map(|&b| rot * b));
    }
    Ok(chips)
}

/// Barker spreading starting from phase 0.
pub fn barker_spread(bits: &[u8], rate: Rate) -> Result<Vec<Sample>> {
    let mut phase = 0;
    barker_spread_from(bits, rate, &mut phase)
}

/// Correlate 11 chips with the Barker code.
pub(crate) fn despread(chips: &[Sample]) -> Sample {
    chips.iter().zip(BARKER.iter()).map(|(c, b)| c * b).sum()
}
