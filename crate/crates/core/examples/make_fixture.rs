//! Writes `data/france94_example.csv`: one dataset on the French layout with
//! a strong planted cluster (c = 1.5) and no spatial autocorrelation.
//!
//! ```text
//! cargo run --example make_fixture -- crates/core/data/france94_example.csv [seed]
//! ```

use sarscan::rng;
use sarscan::sim::{generate_dataset, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "crates/core/data/france94_example.csv".into());
    let seed: u64 = std::env::args().nth(2).map_or(Ok(1), |s| s.parse())?;
    let cfg = SimConfig::france94();
    let y = generate_dataset(&cfg, 0.0, 1.5, &mut rng::stream(seed, &[]))?;
    let mut w = csv::Writer::from_path(&out)?;
    w.write_record(["id", "x", "y", "value"])?;
    for (s, v) in cfg.layout.sites().iter().zip(&y) {
        w.write_record([s.id.clone(), s.x.to_string(), s.y.to_string(), format!("{v:.6}")])?;
    }
    w.flush()?;
    println!("wrote {out}; planted cluster: {:?}", cfg.true_cluster.members);
    Ok(())
}
