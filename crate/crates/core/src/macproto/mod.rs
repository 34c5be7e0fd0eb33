//! Discrete-event model of advert-synchronised backscatter on a shared
//! Wi-Fi channel.
//!
//! Each advertising event puts a tone on channels 37, 38 and 39, `ΔT`
//! apart. The tag can turn each tone into one Wi-Fi frame. Background
//! stations send Poisson traffic, defer while the medium is busy, and
//! (when compliant) honour reservations announced by CTS frames.

use crate::channel::trial_rng;
use crate::error::{Error, Result};
use crate::wifi11b::{advert_budget, plcp_overhead_s, Rate};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

/// Largest MAC frame (FCS included) that fits one advertising tone.
pub fn max_payload_bytes(rate_mbps: f64) -> Result<usize> {
    advert_budget(Rate::from_mbps(rate_mbps)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    None,
    RtsCts,
    DataFirst,
    CtsToSelf,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::None, Strategy::RtsCts, Strategy::DataFirst, Strategy::CtsToSelf];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::None => "NONE",
            Strategy::RtsCts => "RTS_CTS",
            Strategy::DataFirst => "DATA_FIRST",
            Strategy::CtsToSelf => "CTS_TO_SELF",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == norm)
            .ok_or_else(|| Error::Parse(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacConfig {
    pub adv_interval_s: f64,
    /// Gap between the starts of consecutive advertising-channel tones.
    pub delta_t_s: f64,
    /// Airtime of one Bluetooth advertising packet.
    pub t_bluetooth_s: f64,
    /// Offered background occupancy (fraction of airtime, Poisson arrivals).
    pub background_load: f64,
    pub background_airtime_s: f64,
    /// Background honours announced reservations.
    pub compliant_background: bool,
    pub strategy: Strategy,
    pub rate_mbps: f64,
    /// Probability the tag's energy detector misses a CTS.
    pub cts_miss_prob: f64,
    /// Tags polled round-robin, one per advertising event.
    pub n_tags: usize,
    /// How far ahead of an advertising event a coordinator's CTS-to-self goes out.
    pub cts_to_self_lead_s: f64,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self {
            adv_interval_s: 20e-3,
            delta_t_s: 400e-6,
            t_bluetooth_s: 376e-6,
            background_load: 0.0,
            background_airtime_s: 1e-3,
            compliant_background: true,
            strategy: Strategy::None,
            rate_mbps: 2.0,
            cts_miss_prob: 0.0,
            n_tags: 1,
            cts_to_self_lead_s: 2e-3,
        }
    }
}

impl MacConfig {
    pub fn reservation_s(&self) -> f64 {
        2.0 * self.delta_t_s + self.t_bluetooth_s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.delta_t_s > 0.0) {
            return bad(format!("delta_t_s must be positive, got {}", self.delta_t_s));
        }
        if !(self.adv_interval_s > 2.0 * self.delta_t_s + self.t_bluetooth_s + self.cts_to_self_lead_s) {
            return bad("advertising interval shorter than one advertising event".into());
        }
        if !(0.0..1.0).contains(&self.background_load) {
            return bad(format!("background load {} outside [0, 1)", self.background_load));
        }
        if !(self.background_airtime_s > 0.0) || !(0.0..=1.0).contains(&self.cts_miss_prob) {
            return bad("background airtime and CTS miss probability out of range".into());
        }
        if self.n_tags == 0 {
            return bad("at least one tag is required".into());
        }
        max_payload_bytes(self.rate_mbps).map(|_| ())
    }

    /// Airtime of one data frame filling the advert budget.
    pub fn data_airtime_s(&self) -> Result<f64> {
        let psdu = max_payload_bytes(self.rate_mbps)?;
        Ok(plcp_overhead_s(true) + psdu as f64 * 8.0 / (self.rate_mbps * 1e6))
    }

    pub fn rts_airtime_s(&self) -> f64 {
        plcp_overhead_s(true) + 20.0 * 8.0 / (self.rate_mbps * 1e6)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub strategy: Strategy,
    pub load: f64,
    pub attempted: u64,
    pub delivered: u64,
    pub collided: u64,
    /// Delivered data bits per second (control frames excluded).
    pub goodput_bps: f64,
    /// Fraction of time the tag's own frames occupy the channel.
    pub occupancy: f64,
    pub background_sent: u64,
    pub background_occupancy: f64,
    /// Tag frames that collided while inside an active reservation.
    pub collided_in_reservation: u64,
    pub per_tag_delivered: Vec<u64>,
}

impl SimReport {
    pub const CSV_HEADER: &'static str = "strategy,load,attempted,delivered,collided,goodput_bps,occupancy";

    pub fn collision_rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.collided as f64 / self.attempted as f64
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{:.6}",
            self.strategy, self.load, self.attempted, self.delivered, self.collided, self.goodput_bps, self.occupancy
        )
    }
}

type Ns = u64;

fn ns(s: f64) -> Ns {
    (s * 1e9).round() as Ns
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    BgEnd,
    TagEnd,
    Reserve { cycle: u64 },
    Advert { cycle: u64, ch: u8 },
    BgArrival,
    BgRetry,
}

#[derive(Debug, Clone, Copy)]
enum Frame {
    Rts,
    Data,
}

struct Sim {
    cfg: MacConfig,
    rng: ChaCha8Rng,
    heap: BinaryHeap<Reverse<(Ns, u64, Event)>>,
    seq: u64,
    end: Ns,
    bg_queue: u64,
    bg_on_air: Option<(Ns, Ns)>,
    bg_retry_at: Option<Ns>,
    tag_busy_until: Ns,
    reservations: Vec<(Ns, Ns)>,
    /// Whether the tag may send data on channels 38/39 of this cycle.
    cleared: Option<u64>,
    report: SimReport,
    tag_airtime: Ns,
    bg_airtime: Ns,
    data_bits: u64,
}

impl Sim {
    fn push(&mut self, t: Ns, e: Event) {
        if t <= self.end {
            self.seq += 1;
            self.heap.push(Reverse((t, self.seq, e)));
        }
    }

    fn reserved_until(&self, t: Ns) -> Option<Ns> {
        self.reservations.iter().filter(|&&(a, b)| a <= t && t < b).map(|&(_, b)| b).max()
    }

    fn medium_free_at(&self, t: Ns) -> Ns {
        let mut free = t.max(self.tag_busy_until);
        if self.cfg.compliant_background {
            while let Some(b) = self.reserved_until(free) {
                free = b;
            }
        }
        free
    }

    fn try_start_bg(&mut self, t: Ns) {
        if self.bg_queue == 0 || self.bg_on_air.is_some() {
            return;
        }
        let free = self.medium_free_at(t);
        if free > t {
            if self.bg_retry_at != Some(free) {
                self.bg_retry_at = Some(free);
                self.push(free, Event::BgRetry);
            }
            return;
        }
        let air = ns(self.cfg.background_airtime_s);
        self.bg_queue -= 1;
        self.bg_on_air = Some((t, t + air));
        self.report.background_sent += 1;
        self.bg_airtime += air;
        self.push(t + air, Event::BgEnd);
    }

    fn add_reservation(&mut self, from: Ns, to: Ns) {
        self.reservations.retain(|&(_, b)| b > from);
        self.reservations.push((from, to));
    }

    /// Put one tag frame on the air; returns whether it got through.
    fn transmit(&mut self, t: Ns, frame: Frame, tag: usize) -> Result<bool> {
        let air = ns(match frame {
            Frame::Rts => self.cfg.rts_airtime_s(),
            Frame::Data => self.cfg.data_airtime_s()?,
        });
        self.report.attempted += 1;
        self.tag_airtime += air;
        self.tag_busy_until = self.tag_busy_until.max(t + air);
        self.push(t + air, Event::TagEnd);
        let hit = self.bg_on_air.is_some_and(|(a, b)| a < t + air && t < b);
        if hit {
            self.report.collided += 1;
            if self.reserved_until(t).is_some() {
                self.report.collided_in_reservation += 1;
            }
            return Ok(false);
        }
        self.report.delivered += 1;
        if let Frame::Data = frame {
            self.report.per_tag_delivered[tag] += 1;
            self.data_bits += 8 * max_payload_bytes(self.cfg.rate_mbps)? as u64;
        }
        Ok(true)
    }

    fn cts_heard(&mut self) -> bool {
        self.rng.gen::<f64>() >= self.cfg.cts_miss_prob
    }

    fn on_advert(&mut self, t: Ns, cycle: u64, ch: u8) -> Result<()> {
        let tag = (cycle % self.cfg.n_tags as u64) as usize;
        match (self.cfg.strategy, ch) {
            (Strategy::None | Strategy::CtsToSelf, _) => {
                self.transmit(t, Frame::Data, tag)?;
            }
            (Strategy::RtsCts, 0) | (Strategy::DataFirst, 0) => {
                let frame = if self.cfg.strategy == Strategy::RtsCts { Frame::Rts } else { Frame::Data };
                if self.transmit(t, frame, tag)? && self.cts_heard() {
                    self.add_reservation(t, t + ns(self.cfg.reservation_s()));
                    self.cleared = Some(cycle);
                }
            }
            (_, _) => {
                if self.cleared == Some(cycle) {
                    self.transmit(t, Frame::Data, tag)?;
                }
            }
        }
        Ok(())
    }

    fn run(mut self, bg: Option<Exp<f64>>) -> Result<SimReport> {
        if let Some(d) = &bg {
            let first = ns(d.sample(&mut self.rng));
            self.push(first, Event::BgArrival);
        }
        let interval = ns(self.cfg.adv_interval_s);
        let lead = ns(self.cfg.cts_to_self_lead_s);
        let mut cycle = 0u64;
        loop {
            let t0 = lead + cycle * interval;
            if t0 > self.end {
                break;
            }
            if self.cfg.strategy == Strategy::CtsToSelf {
                self.push(t0 - lead, Event::Reserve { cycle });
            }
            for ch in 0..3u8 {
                self.push(t0 + ch as Ns * ns(self.cfg.delta_t_s), Event::Advert { cycle, ch });
            }
            cycle += 1;
        }

        while let Some(Reverse((t, _, ev))) = self.heap.pop() {
            match ev {
                Event::BgArrival => {
                    self.bg_queue += 1;
                    if let Some(d) = &bg {
                        let next = t + ns(d.sample(&mut self.rng)).max(1);
                        self.push(next, Event::BgArrival);
                    }
                    self.try_start_bg(t);
                }
                Event::BgEnd => {
                    self.bg_on_air = None;
                    self.try_start_bg(t);
                }
                Event::BgRetry => {
                    if self.bg_retry_at == Some(t) {
                        self.bg_retry_at = None;
                    }
                    self.try_start_bg(t);
                }
                Event::TagEnd => self.try_start_bg(t),
                Event::Reserve { cycle } => {
                    // a CTS-to-self waits for any frame already on the air
                    let from = self.bg_on_air.map_or(t, |(_, b)| b.max(t));
                    let to = lead + cycle * interval + ns(self.cfg.reservation_s());
                    self.add_reservation(from, to);
                }
                Event::Advert { cycle, ch } => self.on_advert(t, cycle, ch)?,
            }
        }
        let dur = self.end as f64 * 1e-9;
        self.report.goodput_bps = self.data_bits as f64 / dur;
        self.report.occupancy = self.tag_airtime as f64 * 1e-9 / dur;
        self.report.background_occupancy = self.bg_airtime as f64 * 1e-9 / dur;
        Ok(self.report)
    }
}

/// Simulate `duration_s` of advertising events against background traffic.
pub fn run_mac_sim(cfg: &MacConfig, duration_s: f64, seed: u64) -> Result<SimReport> {
    cfg.validate()?;
    if duration_s < 100.0 * cfg.adv_interval_s {
        return Err(Error::InvalidParameter(format!(
            "duration {duration_s} s is shorter than 100 advertising intervals"
        )));
    }
    let rate = cfg.background_load / cfg.background_airtime_s;
    let bg = (rate > 0.0).then(|| Exp::new(rate).map_err(|e| Error::InvalidParameter(e.to_string()))).transpose()?;
    let sim = Sim {
        cfg: *cfg,
        rng: trial_rng(seed, 0),
        heap: BinaryHeap::new(),
        seq: 0,
        end: ns(duration_s),
        bg_queue: 0,
        bg_on_air: None,
        bg_retry_at: None,
        tag_busy_until: 0,
        reservations: Vec::new(),
        cleared: None,
        report: SimReport {
            strategy: cfg.strategy,
            load: cfg.background_load,
            attempted: 0,
            delivered: 0,
            collided: 0,
            goodput_bps: 0.0,
            occupancy: 0.0,
            background_sent: 0,
            background_occupancy: 0.0,
            collided_in_reservation: 0,
            per_tag_delivered: vec![0; cfg.n_tags],
        },
        tag_airtime: 0,
        bg_airtime: 0,
        data_bits: 0,
    };
    sim.run(bg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(strategy: Strategy, load: f64) -> MacConfig {
        MacConfig { strategy, background_load: load, ..MacConfig::default() }
    }

    #[test]
    fn payload_budgets() {
        assert_eq!(max_payload_bytes(2.0).unwrap(), 38);
        assert_eq!(max_payload_bytes(5.5).unwrap(), 104);
        assert_eq!(max_payload_bytes(11.0).unwrap(), 209);
        assert_eq!(max_payload_bytes(1.0), Err(Error::OneMbpsDoesNotFit));
        assert!(matches!(max_payload_bytes(3.0), Err(Error::UnknownRate(_))));
    }

    #[test]
    fn empty_channel_delivers_everything() {
        for s in Strategy::ALL {
            let r = run_mac_sim(&cfg(s, 0.0), 2.0, 1).unwrap();
            assert!(r.attempted > 0);
            assert_eq!(r.delivered, r.attempted, "{s}");
            assert_eq!(r.collided, 0);
            assert_eq!(r.background_sent, 0);
        }
    }

    #[test]
    fn every_attempt_is_classified_once() {
        for s in Strategy::ALL {
            let r = run_mac_sim(&cfg(s, 0.4), 3.0, 2).unwrap();
            assert_eq!(r.delivered + r.collided, r.attempted, "{s}");
        }
    }

    #[test]
    fn reservations_are_never_violated_by_compliant_background() {
        for s in [Strategy::RtsCts, Strategy::DataFirst, Strategy::CtsToSelf] {
            for seed in 0..5 {
                let r = run_mac_sim(&cfg(s, 0.6), 4.0, seed).unwrap();
                assert_eq!(r.collided_in_reservation, 0, "{s} {seed}");
                // only the opening frame of a cycle can collide
                let cycles = (4.0 / 20e-3) as u64;
                assert!(r.collided <= cycles, "{s} {seed}");
                let cleared = (r.attempted - cycles) / 2;
                assert!(cleared > 0 && r.delivered >= 2 * cleared, "{s} {seed}");
            }
        }
        let r = run_mac_sim(&cfg(Strategy::CtsToSelf, 0.6), 4.0, 3).unwrap();
        assert_eq!(r.collided, 0);
    }

    #[test]
    fn rts_cts_collides_less_than_none() {
        for seed in 0..10 {
            let none = run_mac_sim(&cfg(Strategy::None, 0.3), 4.0, seed).unwrap();
            let rts = run_mac_sim(&cfg(Strategy::RtsCts, 0.3), 4.0, seed).unwrap();
            assert!(rts.collision_rate() < none.collision_rate(), "seed {seed}");
        }
    }

    #[test]
    fn fifty_packets_per_second_is_negligible_occupancy() {
        // three frames per event, 60 ms apart: 50 frames/s
        let c = MacConfig { adv_interval_s: 60e-3, ..MacConfig::default() };
        let r = run_mac_sim(&c, 6.0, 0).unwrap();
        assert!((r.attempted as f64 / 6.0 - 50.0).abs() <= 1.0);
        assert!(r.occupancy <= 50.0 * 248e-6 + 1e-9, "{}", r.occupancy);
    }

    #[test]
    fn cts_misses_abort_the_cycle() {
        let c = MacConfig { cts_miss_prob: 1.0, ..cfg(Strategy::RtsCts, 0.0) };
        let r = run_mac_sim(&c, 2.0, 0).unwrap();
        assert_eq!(r.goodput_bps, 0.0);
        assert_eq!(r.attempted, r.delivered);
    }

    #[test]
    fn tags_share_cycles_round_robin() {
        let c = MacConfig { n_tags: 3, ..MacConfig::default() };
        let r = run_mac_sim(&c, 3.0, 0).unwrap();
        let (lo, hi) = (r.per_tag_delivered.iter().min().unwrap(), r.per_tag_delivered.iter().max().unwrap());
        assert!(hi - lo <= 3);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = run_mac_sim(&cfg(Strategy::DataFirst, 0.5), 2.0, 7).unwrap();
        let b = run_mac_sim(&cfg(Strategy::DataFirst, 0.5), 2.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.csv_row().split(',').count(), SimReport::CSV_HEADER.split(',').count());
    }

    #[test]
    fn rejects_short_runs_and_bad_configs() {
        assert!(run_mac_sim(&MacConfig::default(), 1.0, 0).is_err());
        let c = MacConfig { delta_t_s: 0.0, ..MacConfig::default() };
        assert!(run_mac_sim(&c, 2.0, 0).is_err());
        let c = MacConfig { rate_mbps: 1.0, ..MacConfig::default() };
        assert_eq!(run_mac_sim(&c, 2.0, 0), Err(Error::OneMbpsDoesNotFit));
        assert_eq!("rts-cts".parse::<Strategy>().unwrap(), Strategy::RtsCts);
    }
}
