use super::BleChannel;

/// Data-whitening LFSR, polynomial x^7 + x^4 + 1.
///
/// Register position 0 lives in bit 6 and position 6 in bit 0, so the
/// channel-number initialisation is simply `0x40 | channel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Whitener {
    state: u8,
}

impl Whitener {
    pub fn new(channel: BleChannel) -> Self {
        Self { state: 0x40 | (channel.index() & 0x3f) }
    }

    pub fn state(&self) -> u8 {
        self.state
    }

    /// Next keystream bit.
    pub fn next_bit(&mut self) -> u8 {
        let out = self.state & 1;
        self.state >>= 1;
        if out == 1 {
            self.state ^= 0x44;
        }
        out
    }

    pub fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.next_bit();
        }
    }

    /// XOR `bits` in place with the keystream.
    pub fn apply(&mut self, bits: &mut [u8]) {
        for b in bits {
            *b ^= self.next_bit();
        }
    }
}

impl Iterator for Whitener {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.next_bit())
    }
}

/// First `n` keystream bits for `channel`.
pub fn whitening_sequence(channel: BleChannel, n: usize) -> Vec<u8> {
    Whitener::new(channel).take(n).collect()
}
