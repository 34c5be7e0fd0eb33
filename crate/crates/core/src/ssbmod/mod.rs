//! Four-state single-sideband backscatter modulator.
//!
//! Each impedance state reflects with one of the four diagonal constellation
//! points `±1±j`. Stepping through them a quarter cycle at a time synthesises
//! `e^{j2πΔft}` (square-wave approximated), which shifts the incident tone to
//! one side only. Multiplying that rotation by a data symbol is itself just a
//! relabelling of the states, so arbitrary `{±1, ±j}` chip streams ride on the
//! shift for free.

mod plan;

pub use plan::FrequencyPlan;

use crate::error::{Error, Result};
use crate::sigcore::{integer_ratio, IqBuffer, Sample};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

/// Default backscatter efficiency |Γ|.
pub const DEFAULT_ETA: f64 = 0.5;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackscatterState {
    A,
    B,
    C,
    D,
}

impl BackscatterState {
    pub const ALL: [BackscatterState; 4] = [Self::A, Self::B, Self::C, Self::D];

    /// Unnormalised reflection coefficient.
    pub fn geometry(self) -> Sample {
        match self {
            Self::A => Sample::new(1.0, 1.0),
            Self::B => Sample::new(1.0, -1.0),
            Self::C => Sample::new(-1.0, 1.0),
            Self::D => Sample::new(-1.0, -1.0),
        }
    }

    /// Circuit impedance realising this state against antenna impedance `z_a`.
    pub fn impedance(self, z_a: Sample) -> Sample {
        let j = Sample::i();
        let two = Sample::new(2.0, 0.0);
        let ratio = match self {
            Self::A => -j / (two + j),
            Self::B => j / (two - j),
            Self::C => (two - j) / j,
            Self::D => (two + j) / (-j),
        };
        ratio * z_a
    }

    /// Physical reflection coefficient: geometry scaled to magnitude `eta`.
    pub fn gamma(self, eta: f64) -> Sample {
        self.geometry() * (eta * FRAC_1_SQRT_2)
    }

    /// State whose geometry equals `g` (within tolerance).
    pub fn from_geometry(g: Sample) -> Option<Self> {
        Self::ALL.into_iter().find(|s| (s.geometry() - g).norm() < TOL)
    }

    pub fn label(self) -> char {
        match self {
            Self::A => 'A',
            Self::B => 'B',
            Self::C => 'C',
            Self::D => 'D',
        }
    }
}

impl fmt::Display for BackscatterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Γ = (z_a − z_c)/(z_a + z_c).
pub fn reflection_coefficient(z_c: Sample, z_a: Sample) -> Result<Sample> {
    let den = z_a + z_c;
    if den.norm() < 1e-12 * (z_a.norm() + z_c.norm()).max(1e-300) {
        return Err(Error::Singularity);
    }
    Ok((z_a - z_c) / den)
}

/// Relabel `state` by a data symbol.
///
/// Axis symbols `{±1, ±j}` multiply the geometry directly. Diagonal symbols
/// `±1±j` are first divided by `1+j`, removing the constant √2·e^{jπ/4}
/// that a differential receiver cannot see.
pub fn compose(symbol: Sample, state: BackscatterState) -> Result<BackscatterState> {
    let unit = if is_axis(symbol) {
        symbol
    } else if is_diagonal(symbol) {
        symbol / Sample::new(1.0, 1.0)
    } else {
        return Err(Error::UnrealizableConstellation { re: symbol.re, im: symbol.im });
    };
    let unit = Sample::new(unit.re.round(), unit.im.round());
    BackscatterState::from_geometry(unit * state.geometry())
        .ok_or(Error::UnrealizableConstellation { re: symbol.re, im: symbol.im })
}

fn is_axis(s: Sample) -> bool {
    [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)].iter().any(|&(re, im)| (s - Sample::new(re, im)).norm() < TOL)
}

fn is_diagonal(s: Sample) -> bool {
    (s.re.abs() - 1.0).abs() < TOL && (s.im.abs() - 1.0).abs() < TOL
}

/// Piecewise-constant state sequence on the master clock.
#[derive(Debug, Clone, PartialEq)]
pub struct StateWaveform {
    pub states: Vec<BackscatterState>,
    /// States per second (the master clock).
    pub state_rate: f64,
    pub start_time: f64,
}

impl StateWaveform {
    pub fn duration(&self) -> f64 {
        self.states.len() as f64 / self.state_rate
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration()
    }

    pub fn with_start(mut self, start_time: f64) -> Self {
        self.start_time = start_time;
        self
    }

    /// CSV `time_s,state_label,gamma_re,gamma_im`.
    pub fn to_csv(&self, eta: f64) -> String {
        let mut out = String::from("time_s,state_label,gamma_re,gamma_im\n");
        for (i, s) in self.states.iter().enumerate() {
            let g = s.gamma(eta);
            let t = self.start_time + i as f64 / self.state_rate;
            out.push_str(&format!("{t:.12e},{},{:.9},{:.9}\n", s.label(), g.re, g.im));
        }
        out
    }
}

/// One shift cycle in order of increasing phase (positive frequency).
const FORWARD: [BackscatterState; 4] =
    [BackscatterState::A, BackscatterState::C, BackscatterState::D, BackscatterState::B];

/// Quarter-cycle state index `k` of a rotation in direction `sign`.
pub fn quadrature_state(k: usize, sign: i32) -> BackscatterState {
    if sign >= 0 {
        FORWARD[k % 4]
    } else {
        FORWARD[(4 - k % 4) % 4]
    }
}

/// Square-wave `cos + j·sin` at `sign·|delta_f|`, four states per cycle.
pub fn quadrature_state_sequence(delta_f: f64, duration: f64, sign: i32) -> Result<StateWaveform> {
    let df = delta_f.abs();
    if !(df > 0.0) || duration < 1.0 / df * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "duration {duration} s is shorter than one shift cycle at {delta_f} Hz"
        )));
    }
    let n = (duration * 4.0 * df + 1e-9).floor() as usize;
    let sign = if sign >= 0 { 1 } else { -1 } * if delta_f < 0.0 { -1 } else { 1 };
    Ok(StateWaveform {
        states: (0..n).map(|k| quadrature_state(k, sign)).collect(),
        state_rate: 4.0 * df,
        start_time: 0.0,
    })
}

/// Compose a symbol stream at `symbol_rate` with the plan's shift.
pub fn compose_waveform(symbols: &[Sample], symbol_rate: f64, plan: &FrequencyPlan) -> Result<StateWaveform> {
    let ticks = integer_ratio(plan.master_clock, symbol_rate).ok_or_else(|| {
        Error::SampleRateMismatch(format!(
            "symbol rate {symbol_rate} Hz does not divide master clock {} Hz",
            plan.master_clock
        ))
    })?;
    let sign = plan.sign();
    let mut states = Vec::with_capacity(symbols.len() * ticks);
    for (i, &s) in symbols.iter().enumerate() {
        for t in 0..ticks {
            let k = i * ticks + t;
            states.push(compose(s, quadrature_state(k, sign))?);
        }
    }
    Ok(StateWaveform { states, state_rate: plan.master_clock, start_time: 0.0 })
}

/// Reflected field: `incident[n] · Γ(n)`, with Γ = 0 outside the waveform.
pub fn apply_waveform(incident: &IqBuffer, waveform: &StateWaveform, eta: f64) -> Result<IqBuffer> {
    let per_state = integer_ratio(incident.sample_rate, waveform.state_rate).ok_or_else(|| {
        Error::SampleRateMismatch(format!(
            "incident rate {} Hz is not a multiple of state rate {} Hz",
            incident.sample_rate, waveform.state_rate
        ))
    })?;
    let start = (waveform.start_time * incident.sample_rate).round() as isize;
    let gammas: Vec<Sample> = BackscatterState::ALL.iter().map(|s| s.gamma(eta)).collect();
    let idx = |s: BackscatterState| s as usize;
    let samples = incident
        .samples
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let k = n as isize - start;
            if k < 0 {
                return Sample::new(0.0, 0.0);
            }
            match waveform.states.get(k as usize / per_state) {
                Some(&s) => x * gammas[idx(s)],
                None => Sample::new(0.0, 0.0),
            }
        })
        .collect();
    IqBuffer::new(samples, incident.sample_rate, incident.center_freq)
}

/// Compose `symbols` with the plan's shift and reflect `incident`, switching
/// from `start_time` onward.
pub fn apply_backscatter(
    incident: &IqBuffer,
    plan: &FrequencyPlan,
    symbols: &[Sample],
    symbol_rate: f64,
    start_time: f64,
    eta: f64,
) -> Result<IqBuffer> {
    let wf = compose_waveform(symbols, symbol_rate, plan)?.with_start(start_time);
    apply_waveform(incident, &wf, eta)
}

/// Double-sideband baseline: Γ = η·symbol·sq(t) with sq a ±1 square wave
/// at |Δf|, on the same quarter-cycle grid as the SSB modulator.
pub fn dsb_backscatter(
    incident: &IqBuffer,
    delta_f: f64,
    symbols: &[Sample],
    symbol_rate: f64,
    start_time: f64,
    eta: f64,
) -> Result<IqBuffer> {
    let state_rate = 4.0 * delta_f.abs();
    let per_state = integer_ratio(incident.sample_rate, state_rate).ok_or_else(|| {
        Error::SampleRateMismatch(format!(
            "incident rate {} Hz is not a multiple of 4·Δf = {state_rate} Hz",
            incident.sample_rate
        ))
    })?;
    let per_symbol = integer_ratio(incident.sample_rate, symbol_rate).ok_or_else(|| {
        Error::SampleRateMismatch(format!(
            "incident rate {} Hz is not a multiple of symbol rate {symbol_rate} Hz",
            incident.sample_rate
        ))
    })?;
    let start = (start_time * incident.sample_rate).round() as isize;
    let samples = incident
        .samples
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let k = n as isize - start;
            if k < 0 {
                return Sample::new(0.0, 0.0);
            }
            let k = k as usize;
            match symbols.get(k / per_symbol) {
                Some(&s) => {
                    // cos sign over the quarters at 45°, 135°, 225°, 315°
                    let sq = if matches!((k / per_state) % 4, 0 | 3) { 1.0 } else { -1.0 };
                    x * s * (eta * sq)
                }
                None => Sample::new(0.0, 0.0),
            }
        })
        .collect();
    IqBuffer::new(samples, incident.sample_rate, incident.center_freq)
}
