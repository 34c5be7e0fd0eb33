use super::CodeRate;

/// Additive (frame-synchronous) scrambler keystream, `x^7 + x^4 + 1`.
/// The seed is the 7-bit register; bit 6 holds x^7.
pub struct Keystream {
    state: u8,
}

impl Keystream {
    pub fn new(seed: u8) -> Self {
        Self { state: seed & 0x7f }
    }

    pub fn next_bit(&mut self) -> u8 {
        let b = ((self.state >> 6) ^ (self.state >> 3)) & 1;
        self.state = ((self.state << 1) | b) & 0x7f;
        b
    }
}

impl Iterator for Keystream {
    type Item = u8;
    fn next(&mut self) -> Option<u8> {
        Some(self.next_bit())
    }
}

/// Rate-1/2 encoder, generators 133 and 171 (octal), zero initial state.
/// Output order per input bit: A (133) then B (171).
pub fn conv_encode(bits: &[u8]) -> Vec<u8> {
    conv_encode_from(0, bits).0
}

/// Continue encoding from register `state` (bit i holds b[k-1-i]);
/// returns the coded bits and the final register.
pub fn conv_encode_from(mut state: u8, bits: &[u8]) -> (Vec<u8>, u8) {
    let mut out = Vec::with_capacity(bits.len() * 2);
    for &b in bits {
        let (a, c) = encode_step(state, b & 1);
        out.push(a);
        out.push(c);
        state = ((state << 1) | (b & 1)) & 0x3f;
    }
    (out, state)
}

fn encode_step(state: u8, b: u8) -> (u8, u8) {
    let s = |i: u8| (state >> i) & 1;
    let a = b ^ s(1) ^ s(2) ^ s(4) ^ s(5);
    let c = b ^ s(0) ^ s(1) ^ s(2) ^ s(5);
    (a, c)
}

/// Keep-pattern over one puncturing period of (A, B) pairs.
fn keep_pattern(rate: CodeRate) -> &'static [bool] {
    match rate {
        CodeRate::Half => &[true, true],
        // A0 B0 A1 (B1 dropped)
        CodeRate::TwoThirds => &[true, true, true, false],
        // A0 B0 A1 B2 (B1, A2 dropped)
        CodeRate::ThreeQuarters => &[true, true, true, false, false, true],
    }
}

pub fn puncture(coded: &[u8], rate: CodeRate) -> Vec<u8> {
    let pat = keep_pattern(rate);
    coded.iter().enumerate().filter(|(i, _)| pat[i % pat.len()]).map(|(_, &b)| b).collect()
}

/// Reinsert erasures (`None`) at punctured positions.
pub fn depuncture(bits: &[u8], rate: CodeRate) -> Vec<Option<u8>> {
    let pat = keep_pattern(rate);
    let mut out = Vec::with_capacity(bits.len() * 2);
    let mut it = bits.iter();
    let mut i = 0;
    loop {
        if pat[i % pat.len()] {
            match it.next() {
                Some(&b) => out.push(Some(b)),
                None => break,
            }
        } else {
            out.push(None);
        }
        i += 1;
    }
    // drop a trailing partial pair
    out.truncate(out.len() / 2 * 2);
    out
}

/// Hard-decision Viterbi decoder for [`conv_encode`]; erasures cost nothing.
pub fn viterbi_decode(coded: &[Option<u8>]) -> Vec<u8> {
    let n = coded.len() / 2;
    const INF: u32 = u32::MAX / 2;
    let mut metric = [INF; 64];
    metric[0] = 0;
    let mut history: Vec<[u8; 64]> = Vec::with_capacity(n);
    for k in 0..n {
        let (ra, rb) = (coded[2 * k], coded[2 * k + 1]);
        let mut next = [INF; 64];
        let mut from = [0u8; 64];
        for (s, &m) in metric.iter().enumerate() {
            if m >= INF {
                continue;
            }
            for b in 0..2u8 {
                let (a, c) = encode_step(s as u8, b);
                let cost = ra.map_or(0, |r| (r != a) as u32) + rb.map_or(0, |r| (r != c) as u32);
                let ns = ((s << 1) | b as usize) & 0x3f;
                if m + cost < next[ns] {
                    next[ns] = m + cost;
                    from[ns] = s as u8;
                }
            }
        }
        metric = next;
        history.push(from);
    }
    let mut state = (0..64).min_by_key(|&s| metric[s]).unwrap_or(0);
    let mut out = vec![0u8; n];
    for k in (0..n).rev() {
        out[k] = (state & 1) as u8;
        state = history[k][state] as usize;
    }
    out
}
