mod common;

use proptest::prelude::*;
use sarscan::layouts;
use sarscan::sar::{estimate_rho, spatial_filter, LogDetEngine};
use sarscan::scan::{detect, gaussian_llr, scan, sequential_detect, DetectConfig, ScanCore, ScanMethod, ScanOptions};
use sarscan::spatial::{CandidateCluster, CandidateSet, Layout, Site, SpatialDataset};
use sarscan::weights::{morans_i, row_standardize, WeightsMatrix};

fn lattice_w() -> WeightsMatrix {
    row_standardize(&layouts::lattice(5, 4).contiguity())
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn spread(y: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - m).powi(2)).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filter_is_linear(a in values(20), b in values(20), s in -3.0f64..3.0, rho in -0.9f64..0.9) {
        let w = lattice_w();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + y).collect();
        let fa = spatial_filter(&a, &w, rho);
        let fb = spatial_filter(&b, &w, rho);
        for (i, v) in spatial_filter(&mix, &w, rho).iter().enumerate() {
            prop_assert!((v - (s * fa[i] + fb[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn filter_at_zero_is_identity(a in values(20)) {
        prop_assert_eq!(spatial_filter(&a, &lattice_w(), 0.0), a);
    }

    #[test]
    fn moran_is_affine_invariant(y in values(20), s in 0.1f64..5.0, t in -50.0f64..50.0) {
        prop_assume!(spread(&y) > 1e-3);
        let w = lattice_w();
        let z: Vec<f64> = y.iter().map(|v| s * v + t).collect();
        prop_assert!((morans_i(&w, &y).unwrap() - morans_i(&w, &z).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn row_standardize_is_idempotent(extra in prop::collection::vec((0usize..20, 0usize..20, 0.1f64..3.0), 0..30)) {
        let base = layouts::lattice(5, 4).contiguity();
        let mut cells: std::collections::BTreeMap<(usize, usize), f64> =
            base.triplets().map(|(i, j, v)| ((i, j), v)).collect();
        for (i, j, v) in extra.into_iter().filter(|(i, j, _)| i != j) {
            cells.insert((i, j), v);
        }
        let trip: Vec<(usize, usize, f64)> = cells.into_iter().map(|((i, j), v)| (i, j, v)).collect();
        let w = WeightsMatrix::from_triplets(20, trip, base.scheme().clone()).unwrap();
        let once = row_standardize(&w);
        let twice = row_standardize(&once);
        prop_assert!(once.is_row_standardized());
        for ((i, j, a), (k, l, b)) in once.triplets().zip(twice.triplets()) {
            prop_assert_eq!((i, j), (k, l));
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn llr_is_affine_invariant(y in values(15), s in 0.1f64..5.0, t in -20.0f64..20.0, size in 1usize..8) {
        prop_assume!(spread(&y) > 1e-3);
        let c = CandidateCluster { center: 0, radius: 0.0, members: (0..size).collect() };
        prop_assume!(gaussian_llr(&y, &c).is_ok());
        let z: Vec<f64> = y.iter().map(|v| s * v + t).collect();
        let a = gaussian_llr(&y, &c).unwrap();
        let b = gaussian_llr(&z, &c).unwrap();
        prop_assert!((a - b).abs() < 1e-8 * a.abs().max(1.0));
    }

    #[test]
    fn gaussian_and_df_pick_the_same_window(y in values(20)) {
        prop_assume!(spread(&y) > 1e-3);
        let cands = CandidateSet::circular(&layouts::lattice(5, 4).layout, 0.5).unwrap();
        let g = scan(&y, &cands, ScanCore::Gaussian).unwrap();
        let d = scan(&y, &cands, ScanCore::DistributionFree).unwrap();
        prop_assert_eq!(g.index, d.index);
    }

    #[test]
    fn sequential_detections_are_disjoint(y in values(30), seed in 0u64..1000) {
        prop_assume!(spread(&y) > 1e-3);
        let cands = CandidateSet::circular(&layouts::lattice(6, 5).layout, 0.5).unwrap();
        let opts = ScanOptions { mc_replicates: 19, alpha_level: 1.0, max_clusters: 10, seed };
        let seq = sequential_detect(&y, &y, &cands, ScanCore::Gaussian, &opts).unwrap();
        prop_assert!(!seq.clusters.is_empty());
        let mut used = [false; 30];
        for c in &seq.clusters {
            for &m in &c.cluster.members {
                prop_assert!(!used[m]);
                used[m] = true;
            }
        }
        for pair in seq.clusters.windows(2) {
            prop_assert!(pair[0].statistic >= pair[1].statistic);
        }
    }

    #[test]
    fn scan_is_permutation_equivariant(y in values(12), shift in 1usize..12) {
        prop_assume!(spread(&y) > 1e-3);
        // relabelling sites and values together leaves the scan statistic unchanged;
        // the window itself may differ when windows tie
        let sites: Vec<Site> = (0..12).map(|i| Site::new(format!("s{i}"), (i % 4) as f64 * 1.3, (i / 4) as f64 + 0.01 * i as f64)).collect();
        let l = Layout::new(sites.clone()).unwrap();
        let perm: Vec<usize> = (0..12).map(|i| (i + shift) % 12).collect();
        let l2 = Layout::new(perm.iter().map(|&p| sites[p].clone()).collect()).unwrap();
        let y2: Vec<f64> = perm.iter().map(|&p| y[p]).collect();
        let a = scan(&y, &CandidateSet::circular(&l, 0.5).unwrap(), ScanCore::Gaussian).unwrap();
        let b = scan(&y2, &CandidateSet::circular(&l2, 0.5).unwrap(), ScanCore::Gaussian).unwrap();
        prop_assert!((a.statistic - b.statistic).abs() < 1e-9 * a.statistic.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sar_scan_with_zero_rho_reduces_to_gaussian(y in values(20), seed in 0u64..100) {
        prop_assume!(spread(&y) > 1e-3);
        let lat = layouts::lattice(5, 4);
        let w = lattice_w();
        let cands = CandidateSet::circular(&lat.layout, 0.5).unwrap();
        let sel = estimate_rho(&y, &w, &cands, &LogDetEngine::new(&w).unwrap()).unwrap();
        let opts = ScanOptions { mc_replicates: 49, seed, ..ScanOptions::default() };
        // scanning the filter at ρ̂ = 0 is scanning the raw outcome
        let filtered = spatial_filter(&y, &w, 0.0);
        let a = sequential_detect(&filtered, &y, &cands, ScanCore::Gaussian, &opts).unwrap();
        let b = sequential_detect(&y, &y, &cands, ScanCore::Gaussian, &opts).unwrap();
        prop_assert_eq!(a, b);
        // and p-sar detection equals the Gaussian scan of the data filtered at its ρ̂
        let ds = SpatialDataset::new(lat.layout.clone(), y.clone()).unwrap();
        let cfg = DetectConfig { scan: opts, ..DetectConfig::default() };
        let p = detect(&ds, Some(&w), ScanMethod::PSar, &cfg).unwrap();
        let direct = sequential_detect(&spatial_filter(&y, &w, sel.rho_hat), &y, &cands, ScanCore::Gaussian, &opts).unwrap();
        prop_assert_eq!(p.most_likely, direct.most_likely);
        prop_assert_eq!(p.clusters, direct.clusters);
    }
}
