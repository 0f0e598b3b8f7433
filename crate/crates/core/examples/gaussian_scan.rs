//! Gaussian scan on the bundled French layout with a planted cluster.

use sarscan::layouts;
use sarscan::rng;
use sarscan::scan::{mc_pvalue, scan, ScanCore};
use sarscan::sim::{generate_dataset, SimConfig};
use sarscan::spatial::CandidateSet;

fn main() -> sarscan::Result<()> {
    let cfg = SimConfig::france94();
    let y = generate_dataset(&cfg, 0.0, 1.5, &mut rng::stream(11, &[]))?;

    let cands = CandidateSet::circular(&cfg.layout, 0.5)?;
    println!("{} sites, {} candidate windows", cfg.n(), cands.len());

    let best = scan(&y, &cands, ScanCore::Gaussian)?;
    let p = mc_pvalue(best.statistic, &y, &cands, ScanCore::Gaussian, 999, 1)?;
    let ids: Vec<&str> = best
        .cluster
        .members
        .iter()
        .map(|&i| cfg.layout.sites()[i].id.as_str())
        .collect();
    println!("most likely cluster {ids:?}");
    println!("LLR = {:.3}, p = {p}", best.statistic);

    let truth = layouts::france94_true_cluster(&cfg.layout);
    let hit = best.cluster.members.iter().filter(|&&i| truth.contains(i)).count();
    println!("{hit} of {} planted sites recovered", truth.size());
    Ok(())
}
