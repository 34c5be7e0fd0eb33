//! OFDM amplitude-modulated downlink.
//!
//! An 802.11g transmitter is fed payload bits chosen so that selected OFDM
//! symbols carry one constellation point on every data subcarrier. Such a
//! symbol collapses to a spike in its first sample and is otherwise quiet,
//! so a pair (random, constant) reads as high-then-low to an envelope
//! detector while (random, random) reads as high-high. Two OFDM symbols per
//! downlink bit at 4 µs each gives 125 kbps.
//!
//! Only the DATA field is modelled. The scrambler, encoder and pilot
//! polarity all start at the first DATA symbol.

mod coding;
mod envelope;
mod interleave;
mod mapping;

pub use coding::{conv_encode, conv_encode_from, depuncture, puncture, viterbi_decode, Keystream};
pub use envelope::{envelope_decode, peak_detect, EnvelopeConfig, EnvelopeDecoded};
pub use interleave::{deinterleave, interleave, interleave_index};
pub use mapping::{demap_point, map_point};

use crate::error::{Error, Result};
use crate::sigcore::{IqBuffer, Sample};
use rand::Rng;
use rustfft::FftPlanner;
use std::fmt;

pub const FFT_SIZE: usize = 64;
pub const CP_LEN: usize = 16;
pub const DATA_SUBCARRIERS: usize = 48;
pub const PILOT_SUBCARRIERS: [i32; 4] = [-21, -7, 7, 21];
const PILOT_VALUES: [f64; 4] = [1.0, 1.0, 1.0, -1.0];
/// Default downlink frame sync byte, sent MSB first with the pair code.
pub const SYNC_PATTERN: u8 = 0xA5;
const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn bits_per_subcarrier(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeRate {
    Half,
    TwoThirds,
    ThreeQuarters,
}

impl CodeRate {
    /// (numerator, denominator)
    pub fn ratio(self) -> (usize, usize) {
        match self {
            CodeRate::Half => (1, 2),
            CodeRate::TwoThirds => (2, 3),
            CodeRate::ThreeQuarters => (3, 4),
        }
    }
}

/// One of the eight 802.11g data rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RateProfile {
    pub modulation: Modulation,
    pub code_rate: CodeRate,
}

impl RateProfile {
    pub const ALL: [RateProfile; 8] = [
        RateProfile::new(Modulation::Bpsk, CodeRate::Half),
        RateProfile::new(Modulation::Bpsk, CodeRate::ThreeQuarters),
        RateProfile::new(Modulation::Qpsk, CodeRate::Half),
        RateProfile::new(Modulation::Qpsk, CodeRate::ThreeQuarters),
        RateProfile::new(Modulation::Qam16, CodeRate::Half),
        RateProfile::new(Modulation::Qam16, CodeRate::ThreeQuarters),
        RateProfile::new(Modulation::Qam64, CodeRate::TwoThirds),
        RateProfile::new(Modulation::Qam64, CodeRate::ThreeQuarters),
    ];

    pub const fn new(modulation: Modulation, code_rate: CodeRate) -> Self {
        Self { modulation, code_rate }
    }

    /// Coded bits per OFDM symbol.
    pub fn ncbps(self) -> usize {
        DATA_SUBCARRIERS * self.modulation.bits_per_subcarrier()
    }

    /// Data bits per OFDM symbol.
    pub fn ndbps(self) -> usize {
        let (n, d) = self.code_rate.ratio();
        self.ncbps() * n / d
    }

    pub fn mbps(self) -> u32 {
        (self.ndbps() / 4) as u32
    }

    pub fn from_mbps(mbps: u32) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.mbps() == mbps)
            .ok_or_else(|| Error::InvalidParameter(format!("no 802.11g profile at {mbps} Mbps")))
    }
}

impl Default for RateProfile {
    fn default() -> Self {
        RateProfile::new(Modulation::Qam16, CodeRate::ThreeQuarters)
    }
}

impl fmt::Display for RateProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Mbps", self.mbps())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig {
    pub sample_rate: f64,
    pub profile: RateProfile,
    /// Insert the four pilot tones. Turning them off is only useful for
    /// analysing the ideal constant symbol.
    pub pilots: bool,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self { sample_rate: 20e6, profile: RateProfile::default(), pilots: true }
    }
}

impl OfdmConfig {
    pub fn with_profile(profile: RateProfile) -> Self {
        Self { profile, ..Self::default() }
    }

    pub fn fft_size(&self) -> usize {
        FFT_SIZE
    }

    pub fn cp_len(&self) -> usize {
        CP_LEN
    }

    pub fn used_subcarriers(&self) -> usize {
        DATA_SUBCARRIERS + PILOT_SUBCARRIERS.len()
    }

    pub fn symbol_len(&self) -> usize {
        FFT_SIZE + CP_LEN
    }

    pub fn symbol_duration(&self) -> f64 {
        self.symbol_len() as f64 / self.sample_rate
    }

    /// Downlink bit rate: one bit per symbol pair.
    pub fn downlink_bit_rate(&self) -> f64 {
        1.0 / (2.0 * self.symbol_duration())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolTag {
    Random,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfdmSymbolPlan {
    pub tags: Vec<SymbolTag>,
    pub bits_encoded: Vec<u8>,
}

impl OfdmSymbolPlan {
    /// 1 → (random, constant); 0 → (random, random).
    pub fn from_bits(bits: &[u8]) -> Self {
        let tags = bits
            .iter()
            .flat_map(|&b| {
                let second = if b & 1 == 1 { SymbolTag::Constant } else { SymbolTag::Random };
                [SymbolTag::Random, second]
            })
            .collect();
        Self { tags, bits_encoded: bits.iter().map(|b| b & 1).collect() }
    }

    /// Sync byte (MSB first) followed by `data`.
    pub fn with_sync(data: &[u8], sync: u8) -> Self {
        let mut bits: Vec<u8> = (0..8).rev().map(|i| (sync >> i) & 1).collect();
        bits.extend(data.iter().map(|b| b & 1));
        Self::from_bits(&bits)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// How a transmitter picks the scrambler seed of successive frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedPolicy {
    Fixed(u8),
    Increment { start: u8 },
}

impl SeedPolicy {
    pub fn seed_for_frame(self, frame: u64) -> Result<u8> {
        match self {
            SeedPolicy::Fixed(s) => check_seed(s),
            SeedPolicy::Increment { start } => {
                let s = check_seed(start)? as u64;
                Ok(((s - 1 + frame) % 127 + 1) as u8)
            }
        }
    }
}

fn check_seed(seed: u8) -> Result<u8> {
    match seed & 0x7f {
        0 => Err(Error::ZeroSeed),
        s => Ok(s),
    }
}

pub fn keystream(seed: u8, n: usize) -> Result<Vec<u8>> {
    Ok(Keystream::new(check_seed(seed)?).take(n).collect())
}

pub fn scramble_11g(bits: &[u8], seed: u8) -> Result<Vec<u8>> {
    let ks = Keystream::new(check_seed(seed)?);
    Ok(bits.iter().zip(ks).map(|(b, k)| (b ^ k) & 1).collect())
}

/// Polarity of the pilots in DATA symbol `i`.
pub fn pilot_polarity(i: usize) -> f64 {
    let ks: Vec<u8> = Keystream::new(0x7f).take(127).collect();
    if ks[(i + 1) % 127] == 1 {
        -1.0
    } else {
        1.0
    }
}

fn bin(k: i32) -> usize {
    k.rem_euclid(FFT_SIZE as i32) as usize
}

/// Logical indices (−26..=26) of the data subcarriers, in mapping order.
pub fn data_subcarriers() -> Vec<i32> {
    (-26..=26).filter(|&k| k != 0 && !PILOT_SUBCARRIERS.contains(&k)).collect()
}

/// Streaming transmit chain; keeps encoder memory across symbols.
struct SymbolChain {
    cfg: OfdmConfig,
    state: u8,
    index: usize,
    data_bins: Vec<usize>,
}

impl SymbolChain {
    fn new(cfg: OfdmConfig) -> Self {
        Self { cfg, state: 0, index: 0, data_bins: data_subcarriers().into_iter().map(bin).collect() }
    }

    /// Data-subcarrier points and the encoder state after one symbol of
    /// already-scrambled bits, without committing.
    fn points(&self, scrambled: &[u8]) -> (Vec<Sample>, u8) {
        let p = self.cfg.profile;
        let (coded, state) = conv_encode_from(self.state, scrambled);
        let nbpsc = p.modulation.bits_per_subcarrier();
        let inter = interleave(&puncture(&coded, p.code_rate), nbpsc);
        let pts = inter.chunks_exact(nbpsc).map(|c| map_point(p.modulation, c)).collect();
        (pts, state)
    }

    fn spectrum(&self, points: &[Sample]) -> Vec<Sample> {
        let mut x = vec![Sample::new(0.0, 0.0); FFT_SIZE];
        for (&b, &p) in self.data_bins.iter().zip(points) {
            x[b] = p;
        }
        if self.cfg.pilots {
            let pol = pilot_polarity(self.index);
            for (&k, &v) in PILOT_SUBCARRIERS.iter().zip(&PILOT_VALUES) {
                x[bin(k)] = Sample::new(v * pol, 0.0);
            }
        }
        x
    }

    fn commit(&mut self, state: u8) {
        self.state = state;
        self.index += 1;
    }
}

/// Time-domain symbol (cyclic prefix first) from 64 frequency bins.
fn synthesize(spectrum: &[Sample], planner: &mut FftPlanner<f64>) -> Vec<Sample> {
    let mut buf = spectrum.to_vec();
    planner.plan_fft_inverse(FFT_SIZE).process(&mut buf);
    let g = 1.0 / 52f64.sqrt();
    let body: Vec<Sample> = buf.iter().map(|v| v * g).collect();
    let mut out = body[FFT_SIZE - CP_LEN..].to_vec();
    out.extend(body);
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Choose payload data bits that realise `plan` after scrambling with
/// `seed`, coding, interleaving and mapping under `cfg`.
pub fn payload_for_plan<R: Rng + ?Sized>(
    plan: &OfdmSymbolPlan,
    seed: u8,
    cfg: &OfdmConfig,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let mut ks = Keystream::new(check_seed(seed)?);
    let ndbps = cfg.profile.ndbps();
    let mut chain = SymbolChain::new(*cfg);
    let mut planner = FftPlanner::new();
    let mut data = Vec::with_capacity(plan.len() * ndbps);
    for (i, &tag) in plan.tags.iter().enumerate() {
        let scrambled = match tag {
            SymbolTag::Constant => {
                if chain.state != 0x3f {
                    return Err(Error::UnachievablePlan(format!(
                        "constant symbol {i} follows encoder state {:#04x}",
                        chain.state
                    )));
                }
                vec![1u8; ndbps]
            }
            SymbolTag::Random => {
                let before_constant = plan.tags.get(i + 1) == Some(&SymbolTag::Constant);
                let mut attempt = 0;
                loop {
                    let mut s: Vec<u8> = (0..ndbps).map(|_| rng.gen_range(0..2)).collect();
                    if !before_constant {
                        break s;
                    }
                    for b in &mut s[ndbps - 6..] {
                        *b = 1;
                    }
                    let (pts, _) = chain.points(&s);
                    let t = synthesize(&chain.spectrum(&pts), &mut planner);
                    let amp: Vec<f64> = t.iter().map(|v| v.norm()).collect();
                    if amp[amp.len() - 1] >= median(amp.clone()) {
                        break s;
                    }
                    attempt += 1;
                    if attempt == MAX_REDRAWS {
                        return Err(Error::UnachievablePlan(format!("no random symbol {i} ends high")));
                    }
                }
            }
        };
        let (_, state) = chain.points(&scrambled);
        chain.commit(state);
        data.extend(scrambled.iter().map(|&b| b ^ ks.next_bit()));
    }
    Ok(data)
}

fn check_len(bits: &[u8], cfg: &OfdmConfig) -> Result<usize> {
    let ndbps = cfg.profile.ndbps();
    if !bits.len().is_multiple_of(ndbps) {
        return Err(Error::MisalignedBits { count: bits.len(), block: ndbps });
    }
    Ok(bits.len() / ndbps)
}

/// Data-subcarrier points per symbol (48 each) for a DATA field.
pub fn subcarrier_points(data: &[u8], seed: u8, cfg: &OfdmConfig) -> Result<Vec<Vec<Sample>>> {
    check_len(data, cfg)?;
    let scrambled = scramble_11g(data, seed)?;
    let mut chain = SymbolChain::new(*cfg);
    Ok(scrambled
        .chunks_exact(cfg.profile.ndbps())
        .map(|s| {
            let (pts, state) = chain.points(s);
            chain.commit(state);
            pts
        })
        .collect())
}

/// 20 Msps time-domain DATA field.
pub fn ofdm_modulate(data: &[u8], seed: u8, cfg: &OfdmConfig) -> Result<IqBuffer> {
    let symbols = subcarrier_points(data, seed, cfg)?;
    let mut chain = SymbolChain::new(*cfg);
    let mut planner = FftPlanner::new();
    let mut out = Vec::with_capacity(symbols.len() * cfg.symbol_len());
    for pts in &symbols {
        out.extend(synthesize(&chain.spectrum(pts), &mut planner));
        chain.index += 1;
    }
    IqBuffer::new(out, cfg.sample_rate, 0.0)
}

/// Coherent reference demodulator: FFT, hard demap, deinterleave, Viterbi
/// and descramble. `rx` must start at the first DATA symbol.
pub fn ofdm_demodulate(rx: &IqBuffer, seed: u8, cfg: &OfdmConfig) -> Result<Vec<u8>> {
    let p = cfg.profile;
    let nbpsc = p.modulation.bits_per_subcarrier();
    let bins: Vec<usize> = data_subcarriers().into_iter().map(bin).collect();
    let fft = FftPlanner::new().plan_fft_forward(FFT_SIZE);
    let g = 52f64.sqrt() / FFT_SIZE as f64;
    let mut coded = Vec::new();
    for sym in rx.samples.chunks_exact(cfg.symbol_len()) {
        let mut buf = sym[CP_LEN..].to_vec();
        fft.process(&mut buf);
        let hard: Vec<u8> = bins.iter().flat_map(|&b| demap_point(p.modulation, buf[b] * g)).collect();
        coded.extend(depuncture(&deinterleave(&hard, nbpsc), p.code_rate));
    }
    let scrambled = viterbi_decode(&coded);
    scramble_11g(&scrambled, seed)
}

/// Fraction of a symbol's energy held by its first post-prefix sample.
pub fn first_sample_fraction(symbol: &[Sample]) -> f64 {
    let body = &symbol[symbol.len() - FFT_SIZE..];
    let total: f64 = body.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        0.0
    } else {
        body[0].norm_sqr() / total
    }
}

/// A complete downlink burst: sync pattern, data bits and the waveform.
#[derive(Debug, Clone)]
pub struct DownlinkFrame {
    pub plan: OfdmSymbolPlan,
    pub payload: Vec<u8>,
    pub seed: u8,
    pub iq: IqBuffer,
}

impl DownlinkFrame {
    pub fn symbols(&self) -> std::slice::ChunksExact<'_, Sample> {
        self.iq.samples.chunks_exact(FFT_SIZE + CP_LEN)
    }
}

pub fn build_downlink<R: Rng + ?Sized>(bits: &[u8], seed: u8, cfg: &OfdmConfig, rng: &mut R) -> Result<DownlinkFrame> {
    let plan = OfdmSymbolPlan::with_sync(bits, SYNC_PATTERN);
    let payload = payload_for_plan(&plan, seed, cfg, rng)?;
    let iq = ofdm_modulate(&payload, seed, cfg)?;
    Ok(DownlinkFrame { plan, payload, seed, iq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::mean_power;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_bits(r: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| r.gen_range(0..2)).collect()
    }

    #[test]
    fn profile_table() {
        let got: Vec<(u32, usize, usize)> = RateProfile::ALL.iter().map(|p| (p.mbps(), p.ncbps(), p.ndbps())).collect();
        assert_eq!(
            got,
            vec![
                (6, 48, 24),
                (9, 48, 36),
                (12, 96, 48),
                (18, 96, 72),
                (24, 192, 96),
                (36, 192, 144),
                (48, 288, 192),
                (54, 288, 216)
            ]
        );
        assert_eq!(RateProfile::default().mbps(), 36);
    }

    #[test]
    fn symbol_timing() {
        let cfg = OfdmConfig::default();
        assert!((cfg.symbol_duration() - 4e-6).abs() < 1e-15);
        assert!((cfg.downlink_bit_rate() - 125e3).abs() < 1e-6);
        assert_eq!(cfg.used_subcarriers(), 52);
    }

    #[test]
    fn scrambler_is_involution_and_rejects_zero_seed() {
        let bits = random_bits(&mut rng(1), 500);
        assert_eq!(scramble_11g(&scramble_11g(&bits, 0x5d).unwrap(), 0x5d).unwrap(), bits);
        assert_eq!(scramble_11g(&bits, 0), Err(Error::ZeroSeed));
        assert_eq!(keystream(0x80, 4), Err(Error::ZeroSeed));
    }

    #[test]
    fn increment_policy_wraps_within_nonzero_seeds() {
        let p = SeedPolicy::Increment { start: 125 };
        let s: Vec<u8> = (0..4).map(|k| p.seed_for_frame(k).unwrap()).collect();
        assert_eq!(s, vec![125, 126, 127, 1]);
        assert_eq!(SeedPolicy::Fixed(9).seed_for_frame(40).unwrap(), 9);
    }

    #[test]
    fn pilot_polarity_prefix() {
        let p: Vec<f64> = (0..8).map(pilot_polarity).collect();
        // p_1..p_8 of the standard sequence
        assert_eq!(p, vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn single_zero_is_two_random_symbols() {
        let cfg = OfdmConfig::default();
        let plan = OfdmSymbolPlan::from_bits(&[0]);
        assert_eq!(plan.tags, vec![SymbolTag::Random; 2]);
        let data = payload_for_plan(&plan, 0x2b, &cfg, &mut rng(2)).unwrap();
        assert_eq!(data.len(), 2 * 144);
        let rx = ofdm_modulate(&data, 0x2b, &cfg).unwrap();
        assert_eq!(ofdm_demodulate(&rx, 0x2b, &cfg).unwrap(), data);
    }

    #[test]
    fn single_one_gives_uniform_constellation() {
        for profile in RateProfile::ALL {
            let cfg = OfdmConfig::with_profile(profile);
            let plan = OfdmSymbolPlan::from_bits(&[1]);
            let data = payload_for_plan(&plan, 0x11, &cfg, &mut rng(3)).unwrap();
            let pts = subcarrier_points(&data, 0x11, &cfg).unwrap();
            let ones = vec![1u8; profile.modulation.bits_per_subcarrier()];
            let want = map_point(profile.modulation, &ones);
            assert!(pts[1].iter().all(|&p| p == want), "{profile}");
            assert!(pts[0].iter().any(|&p| p != want));
        }
    }

    #[test]
    fn constant_first_symbol_is_unachievable() {
        let plan = OfdmSymbolPlan { tags: vec![SymbolTag::Constant], bits_encoded: vec![] };
        let r = payload_for_plan(&plan, 1, &OfdmConfig::default(), &mut rng(0));
        assert!(matches!(r, Err(Error::UnachievablePlan(_))));
    }

    #[test]
    fn random_before_constant_ends_high() {
        let cfg = OfdmConfig::default();
        let f = build_downlink(&[1, 1, 0, 1], 0x4c, &cfg, &mut rng(4)).unwrap();
        for (sym, pair) in f.symbols().zip(f.plan.tags.windows(2)) {
            if pair == [SymbolTag::Random, SymbolTag::Constant] {
                let amp: Vec<f64> = sym.iter().map(|v| v.norm()).collect();
                assert!(amp[amp.len() - 1] >= median(amp.clone()));
            }
        }
    }

    #[test]
    fn constant_symbol_with_pilots_zeroed_keeps_three_quarters_in_first_sample() {
        // 48 equal bins out of 64: |Σ X|² / (64 Σ|X|²) = 48/64.
        let cfg = OfdmConfig { pilots: false, ..OfdmConfig::default() };
        let f = build_downlink(&[1], 0x3e, &cfg, &mut rng(5)).unwrap();
        let constant = f.symbols().last().unwrap();
        assert!((first_sample_fraction(constant) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn constant_cyclic_prefix_is_quiet() {
        for pilots in [false, true] {
            let cfg = OfdmConfig { pilots, ..OfdmConfig::default() };
            let f = build_downlink(&[1; 16], 0x21, &cfg, &mut rng(6)).unwrap();
            let syms: Vec<&[Sample]> = f.symbols().collect();
            let random: Vec<Sample> = f
                .plan
                .tags
                .iter()
                .zip(&syms)
                .filter(|(t, _)| **t == SymbolTag::Random)
                .flat_map(|(_, s)| s.iter().copied())
                .collect();
            let ref_power = mean_power(&random);
            let limit = if pilots { 0.2 } else { 0.1 };
            for (t, s) in f.plan.tags.iter().zip(&syms) {
                if *t == SymbolTag::Constant {
                    assert!(mean_power(&s[..CP_LEN]) < limit * ref_power);
                }
            }
        }
    }

    #[test]
    fn random_symbols_spread_their_energy() {
        let cfg = OfdmConfig::default();
        let mut r = rng(7);
        let n = 200;
        let data = random_bits(&mut r, n * cfg.profile.ndbps());
        let iq = ofdm_modulate(&data, 0x55, &cfg).unwrap();
        for sym in iq.samples.chunks_exact(80) {
            let body = &sym[CP_LEN..];
            let total: f64 = body.iter().map(|v| v.norm_sqr()).sum();
            let peak = body.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
            assert!(peak / total < 0.30);
        }
    }

    #[test]
    fn constant_and_random_power_match_for_unit_modulus_constellations() {
        for m in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16] {
            let cfg = OfdmConfig::with_profile(RateProfile::new(m, CodeRate::Half));
            let f = build_downlink(&[1; 32], 0x70, &cfg, &mut rng(8)).unwrap();
            let (mut pr, mut pc) = (Vec::new(), Vec::new());
            for (t, s) in f.plan.tags.iter().zip(f.symbols()) {
                match t {
                    SymbolTag::Random => pr.extend_from_slice(s),
                    SymbolTag::Constant => pc.extend_from_slice(s),
                }
            }
            let gap = crate::sigcore::to_db(mean_power(&pr) / mean_power(&pc));
            if m == Modulation::Qam16 {
                // the all-ones 16-QAM point is an inner point (energy 0.2)
                assert!(gap > 5.0, "{gap}");
            } else {
                assert!(gap.abs() < 1.0, "{m:?} {gap}");
            }
        }
    }

    #[test]
    fn energy_concentration_separates_tags() {
        let mut r = rng(9);
        for profile in RateProfile::ALL {
            let cfg = OfdmConfig::with_profile(profile);
            let bits = random_bits(&mut r, 40);
            let f = build_downlink(&bits, 0x1f, &cfg, &mut r).unwrap();
            let (mut rand, mut cons) = (Vec::new(), Vec::new());
            for (t, s) in f.plan.tags.iter().zip(f.symbols()) {
                let e = first_sample_fraction(s);
                match t {
                    SymbolTag::Random => rand.push(e),
                    SymbolTag::Constant => cons.push(e),
                }
            }
            let cmin = cons.iter().copied().fold(f64::INFINITY, f64::min);
            let rmax = rand.iter().copied().fold(0.0, f64::max);
            let rmean = rand.iter().sum::<f64>() / rand.len() as f64;
            assert!(cmin > rmax, "{profile}");
            assert!(cmin >= 10.0 * rmean, "{profile}");
        }
    }

    #[test]
    fn pipeline_inverts_for_every_profile() {
        let mut r = rng(10);
        for profile in RateProfile::ALL {
            let cfg = OfdmConfig::with_profile(profile);
            let bits = random_bits(&mut r, 24);
            let f = build_downlink(&bits, 0x66, &cfg, &mut r).unwrap();
            assert_eq!(ofdm_demodulate(&f.iq, 0x66, &cfg).unwrap(), f.payload, "{profile}");
        }
    }

    #[test]
    fn misaligned_data_is_rejected() {
        let r = ofdm_modulate(&[0; 100], 1, &OfdmConfig::default());
        assert_eq!(r.unwrap_err(), Error::MisalignedBits { count: 100, block: 144 });
    }
}
