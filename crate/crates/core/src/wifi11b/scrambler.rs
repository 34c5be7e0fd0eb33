use crate::error::{Error, Result};

/// Register seed used with the long PLCP preamble.
pub const LONG_PREAMBLE_SEED: u8 = 0b110_1100;
/// Register seed used with the short PLCP preamble.
pub const SHORT_PREAMBLE_SEED: u8 = 0b001_1011;

// Seed layout: bit 6 holds the most recent output (z^-1), bit 0 the oldest (z^-7).
fn tap(reg: u8) -> u8 {
    ((reg >> 3) ^ reg) & 1
}

fn push(reg: u8, bit: u8) -> u8 {
    (reg >> 1) | (bit << 6)
}

fn check_seed(seed: u8) -> Result<u8> {
    let s = seed & 0x7f;
    if s == 0 {
        Err(Error::ZeroSeed)
    } else {
        Ok(s)
    }
}

/// Self-synchronising scrambler `1 + z^-4 + z^-7`.
pub fn scramble_11b(bits: &[u8], seed: u8) -> Result<Vec<u8>> {
    let mut reg = check_seed(seed)?;
    Ok(bits
        .iter()
        .map(|&b| {
            let out = (b & 1) ^ tap(reg);
            reg = push(reg, out);
            out
        })
        .collect())
}

/// Inverse of [`scramble_11b`]. The register fills from the received bits,
/// so after seven bits the output is correct whatever `seed` was.
pub fn descramble_11b(bits: &[u8], seed: u8) -> Vec<u8> {
    Descrambler::new(seed).run(bits)
}

/// Streaming descrambler for receivers that decode a frame piecewise.
#[derive(Debug, Clone, Copy)]
pub struct Descrambler {
    reg: u8,
}

impl Descrambler {
    pub fn new(seed: u8) -> Self {
        Self { reg: seed & 0x7f }
    }

    pub fn push(&mut self, bit: u8) -> u8 {
        let out = (bit & 1) ^ tap(self.reg);
        self.reg = push(self.reg, bit & 1);
        out
    }

    pub fn run(&mut self, bits: &[u8]) -> Vec<u8> {
        bits.iter().map(|&b| self.push(b)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<u8> = (0..1000).map(|_| rng.gen_range(0..2)).collect();
        let y = scramble_11b(&x, LONG_PREAMBLE_SEED).unwrap();
        assert_ne!(x, y);
        assert_eq!(descramble_11b(&y, LONG_PREAMBLE_SEED), x);
    }

    #[test]
    fn descrambler_self_synchronises() {
        let x = vec![1u8; 200];
        let y = scramble_11b(&x, 0x55).unwrap();
        assert_eq!(descramble_11b(&y, 0x01)[7..], x[7..]);
    }

    #[test]
    fn zero_input_gives_keystream() {
        // delay-line oracle: z1..z7 = 1101100, out = in ^ z4 ^ z7
        assert_eq!(scramble_11b(&[0; 16], LONG_PREAMBLE_SEED).unwrap(), bits("1000111111100001"));
        assert_eq!(scramble_11b(&[0; 16], SHORT_PREAMBLE_SEED).unwrap(), bits("0001100110101001"));
    }

    #[test]
    fn zero_seed_rejected() {
        assert_eq!(scramble_11b(&[1, 0], 0), Err(Error::ZeroSeed));
    }
}
