/// Block interleaver for one OFDM symbol: `ncbps` coded bits,
/// `nbpsc` bits per subcarrier.
pub fn interleave_index(k: usize, ncbps: usize, nbpsc: usize) -> usize {
    let s = (nbpsc / 2).max(1);
    let i = (ncbps / 16) * (k % 16) + k / 16;
    s * (i / s) + (i + ncbps - 16 * i / ncbps) % s
}

pub fn interleave(bits: &[u8], nbpsc: usize) -> Vec<u8> {
    let n = bits.len();
    let mut out = vec![0u8; n];
    for (k, &b) in bits.iter().enumerate() {
        out[interleave_index(k, n, nbpsc)] = b;
    }
    out
}

pub fn deinterleave(bits: &[u8], nbpsc: usize) -> Vec<u8> {
    let n = bits.len();
    (0..n).map(|k| bits[interleave_index(k, n, nbpsc)]).collect()
}
