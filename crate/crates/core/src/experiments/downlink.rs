use super::{fmt_f, Outcome, Params, Table};
use crate::channel::{awgn_per_symbol, trial_rng};
use crate::error::{Error, Result};
use crate::ofdmlink::{
    build_downlink, envelope_decode, first_sample_fraction, ofdm_demodulate, EnvelopeConfig, OfdmConfig, RateProfile,
    SeedPolicy, SymbolTag,
};
use rand::Rng;
use rayon::prelude::*;

pub(super) const KEYS: &[(&str, &str)] = &[
    ("n_bits", "1000"),
    ("bits_hex", ""),
    ("snr_db", "0:20:5"),
    ("trials", "20"),
    ("profile", "36"),
    ("scrambler_seed", "93"),
    ("seed_policy", "increment"),
    ("tau_us", "0.1"),
    ("pilots", "true"),
];

const GUARD: usize = 64;

struct Trial {
    point: usize,
    trial: usize,
    seed: u8,
    envelope_errors: Option<usize>,
    ofdm_errors: usize,
    n_bits: usize,
    n_payload: usize,
}

fn msb_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1)).collect()
}

fn errors(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

pub(super) fn run(p: &Params) -> Result<Outcome> {
    let cfg =
        OfdmConfig { pilots: p.get("pilots")?, ..OfdmConfig::with_profile(RateProfile::from_mbps(p.get("profile")?)?) };
    let seed: u64 = p.seed()?;
    let start: u8 = p.get("scrambler_seed")?;
    let policy = match p.str("seed_policy") {
        "fixed" => SeedPolicy::Fixed(start),
        "increment" => SeedPolicy::Increment { start },
        s => return Err(Error::Parse(format!("seed_policy must be fixed or increment, got {s:?}"))),
    };
    let env_cfg = EnvelopeConfig { tau_s: p.get::<f64>("tau_us")? * 1e-6, ..EnvelopeConfig::default() };
    let fixed_bits = p.hex("bits_hex")?.map(|b| msb_bits(&b));
    let n_bits: usize = match &fixed_bits {
        Some(b) => b.len(),
        None => p.get("n_bits")?,
    };
    let points = p.sweep("snr_db")?;
    let trials: usize = p.get("trials")?;

    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let results: Vec<Trial> = jobs
        .par_iter()
        .map(|&(point, trial)| {
            let mut rng = trial_rng(seed, (point * trials + trial) as u64);
            let bits = fixed_bits.clone().unwrap_or_else(|| (0..n_bits).map(|_| rng.gen_range(0..2)).collect());
            let frame_seed = policy.seed_for_frame(trial as u64)?;
            let frame = build_downlink(&bits, frame_seed, &cfg, &mut rng)?;
            let clean = frame.iq.padded(GUARD, GUARD);
            let rx =
                if points[point].is_finite() { awgn_per_symbol(&clean, points[point], 1, &mut rng)? } else { clean };
            let envelope_errors = envelope_decode(&rx, &env_cfg, Some(bits.len())).ok().map(|d| errors(&d.bits, &bits));
            let body = rx.slice(GUARD, GUARD + frame.iq.len());
            let ofdm_errors = errors(&ofdm_demodulate(&body, frame_seed, &cfg)?, &frame.payload);
            Ok(Trial {
                point,
                trial,
                seed: frame_seed,
                envelope_errors,
                ofdm_errors,
                n_bits: bits.len(),
                n_payload: frame.payload.len(),
            })
        })
        .collect::<Result<_>>()?;

    let mut out = p.outcome();
    let mut rows = Table::new(
        "downlink_trials.csv",
        &["snr_db", "trial", "scrambler_seed", "synced", "envelope_bit_errors", "ofdm_bit_errors"],
    );
    for r in &results {
        rows.push(vec![
            fmt_f(points[r.point], 2),
            r.trial.to_string(),
            r.seed.to_string(),
            (r.envelope_errors.is_some() as u8).to_string(),
            r.envelope_errors.unwrap_or(r.n_bits).to_string(),
            r.ofdm_errors.to_string(),
        ]);
    }
    let mut ber = Table::new("downlink_ber.csv", &["snr_db", "trials", "sync_failures", "envelope_ber", "ofdm_ber"]);
    for (i, &snr) in points.iter().enumerate() {
        let at: Vec<&Trial> = results.iter().filter(|r| r.point == i).collect();
        let fails = at.iter().filter(|r| r.envelope_errors.is_none()).count();
        let env_err: usize = at.iter().map(|r| r.envelope_errors.unwrap_or(r.n_bits)).sum();
        let env_ber = env_err as f64 / at.iter().map(|r| r.n_bits).sum::<usize>().max(1) as f64;
        let ofdm_ber = at.iter().map(|r| r.ofdm_errors).sum::<usize>() as f64
            / at.iter().map(|r| r.n_payload).sum::<usize>().max(1) as f64;
        out.note(&format!("envelope_ber@{}dB", fmt_f(snr, 1)), fmt_f(env_ber, 5));
        ber.push(vec![fmt_f(snr, 2), at.len().to_string(), fails.to_string(), fmt_f(env_ber, 6), fmt_f(ofdm_ber, 6)]);
    }

    // symbol-level energy concentration of one noiseless frame
    let mut rng = trial_rng(seed, u64::MAX);
    let bits = fixed_bits.unwrap_or_else(|| (0..n_bits).map(|_| rng.gen_range(0..2)).collect());
    let frame = build_downlink(&bits, policy.seed_for_frame(0)?, &cfg, &mut rng)?;
    let mut sym = Table::new("downlink_symbols.csv", &["symbol", "tag", "first_sample_fraction"]);
    let (mut c, mut r) = (Vec::new(), Vec::new());
    for (k, (s, tag)) in frame.symbols().zip(&frame.plan.tags).enumerate() {
        let f = first_sample_fraction(s);
        match tag {
            SymbolTag::Constant => c.push(f),
            SymbolTag::Random => r.push(f),
        }
        sym.push(vec![k.to_string(), format!("{tag:?}").to_uppercase(), fmt_f(f, 6)]);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    out.note("constant_min_fraction", fmt_f(c.iter().copied().fold(f64::INFINITY, f64::min), 4));
    out.note("random_mean_fraction", fmt_f(mean(&r), 4));
    out.note("random_max_fraction", fmt_f(r.iter().copied().fold(0.0, f64::max), 4));
    out.tables.extend([rows, ber, sym]);
    out.iq.push(("downlink_tx.iq".into(), frame.iq));
    Ok(out)
}
