//! Choosing a k-NN weights matrix by Moran's I.

use sarscan::rng;
use sarscan::sim::{generate_dataset, SimConfig};
use sarscan::spatial::pairwise_distances;
use sarscan::weights::{build_knn, morans_i, row_standardize, select_weights};

fn main() -> sarscan::Result<()> {
    let cfg = SimConfig::france94();
    let y = generate_dataset(&cfg, 0.6, 0.0, &mut rng::stream(4, &[]))?;
    let dist = pairwise_distances(&cfg.layout);
    let family = (2..=10)
        .map(|k| build_knn(&dist, k).map(|w| row_standardize(&w)))
        .collect::<sarscan::Result<Vec<_>>>()?;
    let sel = select_weights(&family, &y)?;
    for (k, i) in (2..=10).zip(&sel.per_candidate) {
        let mark = if k - 2 == sel.index { "  <- selected" } else { "" };
        println!("k = {k:2}: I = {:.4}{mark}", i.unwrap_or(f64::NAN));
    }
    println!("contiguity (true W): I = {:.4}", morans_i(&cfg.w_true, &y)?);
    Ok(())
}
