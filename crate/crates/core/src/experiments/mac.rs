use super::{fmt_f, Outcome, Params, Table};
use crate::error::Result;
use crate::macproto::{run_mac_sim, MacConfig, SimReport, Strategy};
use rayon::prelude::*;

pub(super) const KEYS: &[(&str, &str)] = &[
    ("strategies", "NONE,RTS_CTS,DATA_FIRST,CTS_TO_SELF"),
    ("loads", "0:0.5:0.1"),
    ("duration_s", "10"),
    ("runs", "3"),
    ("delta_t_us", "400"),
    ("adv_interval_ms", "20"),
    ("rate", "2"),
    ("cts_miss", "0"),
    ("compliant", "true"),
    ("n_tags", "1"),
];

pub(super) fn run(p: &Params) -> Result<Outcome> {
    let strategies: Vec<Strategy> = p.list("strategies").iter().map(|s| s.parse()).collect::<Result<_>>()?;
    let loads = p.sweep("loads")?;
    let duration: f64 = p.get("duration_s")?;
    let runs: u64 = p.get("runs")?;
    let seed = p.seed()?;
    let base = MacConfig {
        delta_t_s: p.get::<f64>("delta_t_us")? * 1e-6,
        adv_interval_s: p.get::<f64>("adv_interval_ms")? * 1e-3,
        rate_mbps: p.get("rate")?,
        cts_miss_prob: p.get("cts_miss")?,
        compliant_background: p.get("compliant")?,
        n_tags: p.get("n_tags")?,
        ..MacConfig::default()
    };

    let jobs: Vec<(Strategy, f64, u64)> =
        strategies.iter().flat_map(|&s| loads.iter().flat_map(move |&l| (0..runs).map(move |r| (s, l, r)))).collect();
    let reports: Vec<(u64, SimReport)> = jobs
        .par_iter()
        .map(|&(strategy, background_load, r)| {
            let cfg = MacConfig { strategy, background_load, ..base };
            run_mac_sim(&cfg, duration, seed + r).map(|rep| (r, rep))
        })
        .collect::<Result<_>>()?;

    let mut runs_t = Table::new(
        "mac_runs.csv",
        &[
            "strategy",
            "load",
            "run",
            "attempted",
            "delivered",
            "collided",
            "goodput_bps",
            "occupancy",
            "collision_rate",
        ],
    );
    for (r, rep) in &reports {
        runs_t.push(vec![
            rep.strategy.to_string(),
            fmt_f(rep.load, 3),
            r.to_string(),
            rep.attempted.to_string(),
            rep.delivered.to_string(),
            rep.collided.to_string(),
            fmt_f(rep.goodput_bps, 3),
            fmt_f(rep.occupancy, 6),
            fmt_f(rep.collision_rate(), 6),
        ]);
    }

    let mut out = p.outcome();
    let mut mean_t = Table::new("mac_summary.csv", &["strategy", "load", "collision_rate", "goodput_bps", "occupancy"]);
    for &s in &strategies {
        for (li, &l) in loads.iter().enumerate() {
            let group: Vec<&SimReport> =
                reports.iter().map(|(_, rep)| rep).filter(|rep| rep.strategy == s && rep.load == l).collect();
            let n = group.len().max(1) as f64;
            let attempted: u64 = group.iter().map(|r| r.attempted).sum();
            let collided: u64 = group.iter().map(|r| r.collided).sum();
            let rate = if attempted == 0 { 0.0 } else { collided as f64 / attempted as f64 };
            let goodput = group.iter().map(|r| r.goodput_bps).sum::<f64>() / n;
            let occ = group.iter().map(|r| r.occupancy).sum::<f64>() / n;
            mean_t.push(vec![s.to_string(), fmt_f(l, 3), fmt_f(rate, 6), fmt_f(goodput, 3), fmt_f(occ, 6)]);
            if li + 1 == loads.len() {
                out.note(&format!("collision_rate[{s}]@{}", fmt_f(l, 2)), fmt_f(rate, 4));
            }
        }
    }
    out.tables.push(runs_t);
    out.tables.push(mean_t);
    Ok(out)
}
