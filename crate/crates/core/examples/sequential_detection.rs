//! Several disjoint clusters, found one after another.

use sarscan::layouts;
use sarscan::rng;
use sarscan::scan::{sequential_detect, ScanCore, ScanOptions};
use sarscan::spatial::CandidateSet;
use rand_distr::{Distribution, StandardNormal};

fn main() -> sarscan::Result<()> {
    let f = layouts::france94();
    let a = layouts::nearest_window(&f.layout, "59", 5)?; // Nord
    let b = layouts::nearest_window(&f.layout, "13", 5)?; // Bouches-du-Rhône
    let mut r = rng::stream(17, &[]);
    let y: Vec<f64> = (0..f.layout.len())
        .map(|i| {
            let shift = if a.contains(i) { 3.0 } else if b.contains(i) { -3.0 } else { 0.0 };
            let e: f64 = StandardNormal.sample(&mut r);
            shift + e
        })
        .collect();
    let cands = CandidateSet::circular(&f.layout, 0.5)?;
    let opts = ScanOptions {
        mc_replicates: 999,
        max_clusters: 5,
        ..ScanOptions::default()
    };
    let seq = sequential_detect(&y, &y, &cands, ScanCore::Gaussian, &opts)?;
    for c in &seq.clusters {
        let names: Vec<&str> = c.cluster.members.iter().map(|&i| f.names[i].as_str()).collect();
        println!(
            "#{} p = {:.3} mean in {:+.2} out {:+.2}: {}",
            c.rank,
            c.p_value,
            c.mean_inside,
            c.mean_outside,
            names.join(", ")
        );
    }
    Ok(())
}
