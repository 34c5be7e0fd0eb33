use super::Modulation;
use crate::sigcore::Sample;

/// Gray-coded per-axis levels, indexed by the axis bits read MSB first.
fn axis_levels(m: Modulation) -> &'static [f64] {
    match m {
        Modulation::Bpsk | Modulation::Qpsk => &[-1.0, 1.0],
        // 00 −3, 01 −1, 11 +1, 10 +3
        Modulation::Qam16 => &[-3.0, -1.0, 3.0, 1.0],
        // 000 −7, 001 −5, 011 −3, 010 −1, 110 +1, 111 +3, 101 +5, 100 +7
        Modulation::Qam64 => &[-7.0, -5.0, -1.0, -3.0, 7.0, 5.0, 1.0, 3.0],
    }
}

fn norm(m: Modulation) -> f64 {
    match m {
        Modulation::Bpsk => 1.0,
        Modulation::Qpsk => 2f64.sqrt(),
        Modulation::Qam16 => 10f64.sqrt(),
        Modulation::Qam64 => 42f64.sqrt(),
    }
}

fn axis_value(m: Modulation, bits: &[u8]) -> f64 {
    let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    axis_levels(m)[idx]
}

/// Map `bits_per_symbol` bits to one unit-average-energy point.
pub fn map_point(m: Modulation, bits: &[u8]) -> Sample {
    let k = m.bits_per_subcarrier();
    debug_assert_eq!(bits.len(), k);
    let p = if m == Modulation::Bpsk {
        Sample::new(axis_value(m, bits), 0.0)
    } else {
        Sample::new(axis_value(m, &bits[..k / 2]), axis_value(m, &bits[k / 2..]))
    };
    p / norm(m)
}

/// Hard decision back to bits.
pub fn demap_point(m: Modulation, p: Sample) -> Vec<u8> {
    let p = p * norm(m);
    let levels = axis_levels(m);
    let per_axis = if m == Modulation::Bpsk { 1 } else { m.bits_per_subcarrier() / 2 };
    let nearest = |v: f64| -> Vec<u8> {
        let idx = (0..levels.len()).min_by(|&a, &b| (levels[a] - v).abs().total_cmp(&(levels[b] - v).abs())).unwrap();
        (0..per_axis).rev().map(|i| ((idx >> i) & 1) as u8).collect()
    };
    let mut out = nearest(p.re);
    if m != Modulation::Bpsk {
        out.extend(nearest(p.im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_average_energy_and_roundtrip() {
        for m in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64] {
            let k = m.bits_per_subcarrier();
            let mut e = 0.0;
            for v in 0..(1usize << k) {
                let bits: Vec<u8> = (0..k).rev().map(|i| ((v >> i) & 1) as u8).collect();
                let p = map_point(m, &bits);
                e += p.norm_sqr();
                assert_eq!(demap_point(m, p), bits);
            }
            assert!((e / (1 << k) as f64 - 1.0).abs() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn gray_neighbours_differ_by_one_bit() {
        let levels = axis_levels(Modulation::Qam64);
        let mut order: Vec<usize> = (0..8).collect();
        order.sort_by(|&a, &b| levels[a].total_cmp(&levels[b]));
        for w in order.windows(2) {
            assert_eq!((w[0] ^ w[1]).count_ones(), 1);
        }
    }

    #[test]
    fn all_ones_points() {
        assert_eq!(map_point(Modulation::Qam16, &[1, 1, 1, 1]), Sample::new(1.0, 1.0) / 10f64.sqrt());
        assert_eq!(map_point(Modulation::Bpsk, &[1]), Sample::new(1.0, 0.0));
    }
}
