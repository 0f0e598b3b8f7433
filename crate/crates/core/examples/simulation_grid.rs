//! A small simulation grid: Type I error and power per method.
//!
//! ```text
//! cargo run --release --example simulation_grid -- 100
//! ```

use sarscan::scan::ScanMethod;
use sarscan::sim::{run_arms, standard_arms, Arm, SimConfig, WeightsMode};

fn main() -> sarscan::Result<()> {
    let reps = std::env::args().nth(1).map_or(50, |s| s.parse().expect("replicate count"));
    let mut cfg = SimConfig::france94();
    cfg.replicates = reps;
    cfg.rho_grid = vec![0.0, 0.8];
    cfg.c_grid = vec![0.0, 1.0];
    let mut arms = standard_arms();
    arms.push(Arm::new(ScanMethod::PSar, WeightsMode::KnnSelect));
    let res = run_arms(&cfg, &arms)?;
    print!("{}", res.to_csv());
    Ok(())
}
