//! Compare single-sideband and on/off (double-sideband) backscatter of a
//! pure tone: line levels at the shifted tone, its mirror image and the
//! staircase harmonics.

use backscatter_sim::sigcore::{periodogram, IqBuffer, Sample};
use backscatter_sim::ssbmod::{apply_backscatter, dsb_backscatter, FrequencyPlan, DEFAULT_ETA};

fn main() -> backscatter_sim::Result<()> {
    let plan = FrequencyPlan::default();
    let df = plan.delta_f;
    // eight samples per quarter-cycle state
    let fs = 8.0 * plan.master_clock;
    let n = 1 << 17;
    let incident = IqBuffer::tone(0.0, n, fs, 2.426e9)?;
    let symbols = vec![Sample::new(1.0, 0.0); (n as f64 / fs * 11e6) as usize];

    let ssb = periodogram(&apply_backscatter(&incident, &plan, &symbols, 11e6, 0.0, DEFAULT_ETA)?, 8192)?;
    let dsb = periodogram(&dsb_backscatter(&incident, df, &symbols, 11e6, 0.0, DEFAULT_ETA)?, 8192)?;

    println!("{:>12} {:>10} {:>10}", "line", "SSB dB", "DSB dB");
    for (label, k) in [("+Δf", 1.0), ("-Δf", -1.0), ("-3Δf", -3.0), ("+3Δf", 3.0), ("+5Δf", 5.0)] {
        let f = k * df;
        println!("{label:>12} {:>10.2} {:>10.2}", ssb.line_db(f, 3), dsb.line_db(f, 3));
    }
    Ok(())
}
