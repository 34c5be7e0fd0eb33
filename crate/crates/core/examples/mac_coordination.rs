//! Four ways for a tag to share Wi-Fi channel 11 with background traffic,
//! each run for a minute of simulated time at increasing load.

use backscatter_sim::macproto::{run_mac_sim, MacConfig, SimReport, Strategy};

fn main() -> backscatter_sim::Result<()> {
    println!("{},collision_rate", SimReport::CSV_HEADER);
    for load in [0.0, 0.3, 0.6] {
        for strategy in Strategy::ALL {
            let cfg = MacConfig { strategy, background_load: load, ..MacConfig::default() };
            let r = run_mac_sim(&cfg, 60.0, 1)?;
            println!("{},{:.4}", r.csv_row(), r.collision_rate());
        }
    }
    Ok(())
}
