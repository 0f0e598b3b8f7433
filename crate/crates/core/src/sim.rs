//! Simulation study: SAR data with a planted mean shift, repeated scans,
//! and power / true-positive / false-positive summaries per grid cell.
//!
//! Data follow `Y = (I − ρW)⁻¹(α·1 + δ·ξ + ε)` with `δ = c·√2`, `ξ` the
//! indicator of the true cluster and `ε ~ N(0, σ²)` i.i.d.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, LU};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layouts;
use crate::rng;
use crate::sar::{estimate_rho, spatial_filter, LogDetEngine};
use crate::scan::{sequential_detect, ScanMethod, ScanOptions};
use crate::spatial::{pairwise_distances, CandidateCluster, CandidateSet, Layout};
use crate::weights::{build_knn, row_standardize, select_weights, WeightsMatrix};

/// Which weights matrix the SAR methods use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightsMode {
    /// The matrix that generated the data.
    True,
    /// Row-standardized k-NN matrix, k in `knn_range`, with the largest
    /// Moran's I on each dataset.
    KnnSelect,
}

/// One method evaluated under one weights choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arm {
    pub method: ScanMethod,
    pub weights: WeightsMode,
}

impl Arm {
    pub fn new(method: ScanMethod, weights: WeightsMode) -> Self {
        Arm { method, weights }
    }

    /// `p-sar`, or `p-sar/knn-select` for the selected-matrix arm. Methods
    /// without a spatial filter ignore the weights choice.
    pub fn label(&self) -> String {
        match (self.method.uses_sar(), self.weights) {
            (true, WeightsMode::KnnSelect) => format!("{}/knn-select", self.method.label()),
            _ => self.method.label().to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub layout: Layout,
    /// Weights matrix of the data-generating process.
    pub w_true: WeightsMatrix,
    pub true_cluster: CandidateCluster,
    pub rho_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    /// Replicates per grid cell.
    pub replicates: usize,
    /// Monte Carlo permutations per scan.
    pub mc_replicates: usize,
    pub alpha_level: f64,
    pub alpha0: f64,
    pub sigma: f64,
    pub seed: u64,
    pub max_fraction: f64,
    /// Sequential detection rounds; 1 keeps only the most likely cluster.
    pub max_clusters: usize,
    /// Neighbour counts tried by [`WeightsMode::KnnSelect`].
    pub knn_range: (usize, usize),
}

impl SimConfig {
    /// Desk-scale defaults (200 replicates, 199 permutations) on the given
    /// layout.
    pub fn desk(layout: Layout, w_true: WeightsMatrix, true_cluster: CandidateCluster) -> Self {
        SimConfig {
            layout,
            w_true,
            true_cluster,
            rho_grid: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            c_grid: vec![0.0, 0.5, 1.0, 1.5],
            replicates: 200,
            mc_replicates: 199,
            alpha_level: 0.05,
            alpha0: 0.0,
            sigma: 1.0,
            seed: 1,
            max_fraction: 0.5,
            max_clusters: 1,
            knn_range: (2, 10),
        }
    }

    /// Desk-scale defaults on the bundled French layout with the
    /// row-standardized contiguity matrix.
    pub fn france94() -> Self {
        let f = layouts::france94();
        let w = row_standardize(&f.contiguity());
        let truth = layouts::france94_true_cluster(&f.layout);
        Self::desk(f.layout, w, truth)
    }

    /// 1000 replicates and 999 permutations.
    pub fn paper_scale(mut self) -> Self {
        self.replicates = 1000;
        self.mc_replicates = 999;
        self
    }

    pub fn n(&self) -> usize {
        self.layout.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.rho_grid.is_empty() || self.c_grid.is_empty() {
            return Err(Error::invalid("ρ and c grids must be nonempty"));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("at least one replicate is required"));
        }
        if self.w_true.n() != n {
            return Err(Error::invalid(format!("weights matrix has {} sites, layout has {n}", self.w_true.n())));
        }
        if self.true_cluster.members.is_empty() || self.true_cluster.members.iter().any(|&m| m >= n) {
            return Err(Error::invalid("true cluster members must be layout sites"));
        }
        if !(self.sigma >= 0.0) || !self.alpha0.is_finite() {
            return Err(Error::invalid("σ must be nonnegative and α finite"));
        }
        if self.rho_grid.iter().chain(&self.c_grid).any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite"));
        }
        let (k0, k1) = self.knn_range;
        if k0 == 0 || k0 > k1 || k1 >= n {
            return Err(Error::invalid(format!("k-NN range {k0}..={k1} is invalid for {n} sites")));
        }
        Ok(())
    }

    fn scan_options(&self, seed: u64) -> ScanOptions {
        ScanOptions {
            mc_replicates: self.mc_replicates,
            alpha_level: self.alpha_level,
            max_clusters: self.max_clusters,
            seed,
        }
    }
}

/// Smallest LU pivot, relative to the largest, accepted as nonsingular.
const PIVOT_TOL: f64 = 1e-12;

fn factor(w: &WeightsMatrix, rho: f64) -> Result<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let n = w.n();
    let lu = (DMatrix::identity(n, n) - w.to_dense() * rho).lu();
    let u = lu.u();
    let diag = (0..n).map(|i| u[(i, i)].abs());
    let (lo, hi) = diag.fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
    if !(lo > PIVOT_TOL * hi) {
        return Err(Error::numerical(format!("I − ρW is singular at ρ = {rho}")));
    }
    Ok(lu)
}

fn draw_innovation(
    n: usize,
    truth: &[bool],
    alpha0: f64,
    delta: f64,
    sigma: f64,
    rng: &mut impl Rng,
) -> DVector<f64> {
    DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let e: f64 = rng.sample(StandardNormal);
            alpha0 + if truth[i] { delta } else { 0.0 } + sigma * e
        }),
    )
}

/// One dataset from the simulation model.
pub fn generate_dataset(cfg: &SimConfig, rho: f64, c: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let lu = factor(&cfg.w_true, rho)?;
    let n = cfg.n();
    let truth = cfg.true_cluster.indicator(n);
    let b = draw_innovation(n, &truth, cfg.alpha0, c * std::f64::consts::SQRT_2, cfg.sigma, rng);
    let y = lu.solve(&b).ok_or_else(|| Error::numerical("linear solve failed"))?;
    Ok(y.iter().copied().collect())
}

/// [`generate_dataset`] with the factorizations for each ρ cached.
pub struct DataGenerator {
    n: usize,
    truth: Vec<bool>,
    alpha0: f64,
    sigma: f64,
    factors: Vec<(f64, LU<f64, nalgebra::Dyn, nalgebra::Dyn>)>,
}

impl DataGenerator {
    /// Factors `I − ρW` for every ρ in the config's grid.
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        Self::with_rhos(cfg, &cfg.rho_grid)
    }

    pub fn with_rhos(cfg: &SimConfig, rhos: &[f64]) -> Result<Self> {
        let factors = rhos
            .iter()
            .map(|&r| factor(&cfg.w_true, r).map(|lu| (r, lu)))
            .collect::<Result<_>>()?;
        Ok(DataGenerator {
            n: cfg.n(),
            truth: cfg.true_cluster.indicator(cfg.n()),
            alpha0: cfg.alpha0,
            sigma: cfg.sigma,
            factors,
        })
    }

    pub fn generate(&self, rho: f64, c: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
        let lu = self
            .factors
            .iter()
            .find(|(r, _)| *r == rho)
            .map(|(_, lu)| lu)
            .ok_or_else(|| Error::invalid(format!("ρ = {rho} was not prepared")))?;
        let b = draw_innovation(self.n, &self.truth, self.alpha0, c * std::f64::consts::SQRT_2, self.sigma, rng);
        let y = lu.solve(&b).ok_or_else(|| Error::numerical("linear solve failed"))?;
        Ok(y.iter().copied().collect())
    }
}

/// Site-level rates of the union `A` of detected windows: `|A ∩ truth| /
/// |truth|` and `|A \ truth| / (n − |truth|)`.
pub fn tp_fp_rates(detected: &[Vec<usize>], truth: &[usize], n: usize) -> (f64, f64) {
    let mut in_a = vec![false; n];
    for &i in detected.iter().flatten() {
        in_a[i] = true;
    }
    let mut in_truth = vec![false; n];
    for &i in truth {
        in_truth[i] = true;
    }
    let hit = (0..n).filter(|&i| in_a[i] && in_truth[i]).count();
    let miss = (0..n).filter(|&i| in_a[i] && !in_truth[i]).count();
    if hit + miss == 0 {
        return (0.0, 0.0);
    }
    let t = truth.len();
    let tp = if t == 0 { 0.0 } else { hit as f64 / t as f64 };
    let fp = if n == t { 0.0 } else { miss as f64 / (n - t) as f64 };
    (tp, fp)
}

/// Outcome of one method on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    /// Sorted union of significant windows.
    pub detected: Vec<usize>,
    pub mlc_p_value: Option<f64>,
    pub rho_hat: Option<f64>,
    pub selected_k: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub method: String,
    pub arm: Arm,
    pub rho: f64,
    pub c: f64,
    /// Share of replicates with at least one significant window; the Type I
    /// error when `c = 0`.
    pub power: f64,
    pub tp: f64,
    pub fp: f64,
    pub n_ok: usize,
    pub n_fail: usize,
    pub records: Vec<ReplicateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub n_sites: usize,
    pub true_cluster: Vec<usize>,
    pub replicates: usize,
    pub mc_replicates: usize,
    pub alpha_level: f64,
    pub seed: u64,
    pub cells: Vec<CellResult>,
}

impl SimResult {
    pub fn cell(&self, label: &str, rho: f64, c: f64) -> Option<&CellResult> {
        self.cells.iter().find(|x| x.method == label && x.rho == rho && x.c == c)
    }

    /// `method,rho,c,power,tp,fp,n_fail`, one row per cell.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,rho,c,power,tp,fp,n_fail\n");
        for c in &self.cells {
            let _ = writeln!(s, "{},{},{},{},{},{},{}", c.method, c.rho, c.c, c.power, c.tp, c.fp, c.n_fail);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("simulation results serialize")
    }
}

struct KnnFamily {
    ks: Vec<usize>,
    matrices: Vec<WeightsMatrix>,
    engines: Vec<LogDetEngine>,
}

impl KnnFamily {
    fn new(layout: &Layout, (k0, k1): (usize, usize)) -> Result<Self> {
        let dist = pairwise_distances(layout);
        let ks: Vec<usize> = (k0..=k1).collect();
        let matrices: Vec<WeightsMatrix> = ks
            .iter()
            .map(|&k| build_knn(&dist, k).map(|w| row_standardize(&w)))
            .collect::<Result<_>>()?;
        let engines = matrices.iter().map(LogDetEngine::new).collect::<Result<_>>()?;
        Ok(KnnFamily { ks, matrices, engines })
    }
}

/// Spatially filtered outcome under one weights choice.
struct Filtered {
    values: Vec<f64>,
    rho_hat: f64,
    selected_k: Option<usize>,
}

struct Shared<'a> {
    cfg: &'a SimConfig,
    arms: &'a [Arm],
    cands: CandidateSet,
    generator: DataGenerator,
    true_engine: Option<LogDetEngine>,
    knn: Option<KnnFamily>,
    truth: Vec<usize>,
}

impl Shared<'_> {
    fn filtered(&self, y: &[f64], mode: WeightsMode) -> Result<Filtered> {
        let (w, engine, k) = match mode {
            WeightsMode::True => (&self.cfg.w_true, self.true_engine.as_ref().expect("prepared"), None),
            WeightsMode::KnnSelect => {
                let fam = self.knn.as_ref().expect("prepared");
                let sel = select_weights(&fam.matrices, y)?;
                (&fam.matrices[sel.index], &fam.engines[sel.index], Some(fam.ks[sel.index]))
            }
        };
        let rho = estimate_rho(y, w, &self.cands, engine)?;
        Ok(Filtered {
            values: spatial_filter(y, w, rho.rho_hat),
            rho_hat: rho.rho_hat,
            selected_k: k,
        })
    }

    /// All arms on one dataset.
    fn replicate(&self, ri: usize, ci: usize, s: usize) -> Vec<ReplicateRecord> {
        let cfg = self.cfg;
        let (rho, c) = (cfg.rho_grid[ri], cfg.c_grid[ci]);
        let path = [ri as u64, ci as u64, s as u64];
        let failed = |e: &Error| ReplicateRecord {
            replicate: s,
            detected: Vec::new(),
            mlc_p_value: None,
            rho_hat: None,
            selected_k: None,
            error: Some(e.to_string()),
        };
        let mut data_rng = rng::stream(cfg.seed, &[1, path[0], path[1], path[2]]);
        let y = match self.generator.generate(rho, c, &mut data_rng) {
            Ok(y) => y,
            Err(e) => return self.arms.iter().map(|_| failed(&e)).collect(),
        };
        let opts = cfg.scan_options(rng::derive_seed(cfg.seed, &[2, path[0], path[1], path[2]]));
        let mut filters: HashMap<WeightsMode, Result<Filtered>> = HashMap::new();
        self.arms
            .iter()
            .map(|arm| {
                let (work, rho_hat, k) = if arm.method.uses_sar() {
                    let f = filters.entry(arm.weights).or_insert_with(|| self.filtered(&y, arm.weights));
                    match f {
                        Ok(f) => (f.values.as_slice(), Some(f.rho_hat), f.selected_k),
                        Err(e) => return failed(e),
                    }
                } else {
                    (y.as_slice(), None, None)
                };
                match sequential_detect(work, &y, &self.cands, arm.method.core(), &opts) {
                    Ok(seq) => {
                        let mut detected: Vec<usize> =
                            seq.clusters.iter().flat_map(|r| r.cluster.members.iter().copied()).collect();
                        detected.sort_unstable();
                        detected.dedup();
                        ReplicateRecord {
                            replicate: s,
                            detected,
                            mlc_p_value: Some(seq.most_likely.p_value),
                            rho_hat,
                            selected_k: k,
                            error: None,
                        }
                    }
                    Err(e) => failed(&e),
                }
            })
            .collect()
    }
}

/// Runs every arm on every `(ρ, c, replicate)` dataset. Each dataset and each
/// permutation null has its own seeded stream, and cells are reduced in a
/// fixed order, so the result does not depend on the number of threads.
pub fn run_arms(cfg: &SimConfig, arms: &[Arm]) -> Result<SimResult> {
    cfg.validate()?;
    if arms.is_empty() {
        return Err(Error::invalid("no methods to run"));
    }
    let needs = |m: WeightsMode| arms.iter().any(|a| a.method.uses_sar() && a.weights == m);
    let shared = Shared {
        cfg,
        arms,
        cands: CandidateSet::circular(&cfg.layout, cfg.max_fraction)?,
        generator: DataGenerator::new(cfg)?,
        true_engine: if needs(WeightsMode::True) { Some(LogDetEngine::new(&cfg.w_true)?) } else { None },
        knn: if needs(WeightsMode::KnnSelect) { Some(KnnFamily::new(&cfg.layout, cfg.knn_range)?) } else { None },
        truth: cfg.true_cluster.members.clone(),
    };

    let (nr, nc, ns) = (cfg.rho_grid.len(), cfg.c_grid.len(), cfg.replicates);
    let jobs: Vec<(usize, usize, usize)> = (0..nr)
        .flat_map(|r| (0..nc).flat_map(move |c| (0..ns).map(move |s| (r, c, s))))
        .collect();
    let outcomes: Vec<Vec<ReplicateRecord>> = jobs
        .par_iter()
        .map(|&(r, c, s)| shared.replicate(r, c, s))
        .collect();

    let n = cfg.n();
    let mut cells = Vec::with_capacity(arms.len() * nr * nc);
    for (a, arm) in arms.iter().enumerate() {
        for r in 0..nr {
            for c in 0..nc {
                let base = (r * nc + c) * ns;
                let records: Vec<ReplicateRecord> =
                    (0..ns).map(|s| outcomes[base + s][a].clone()).collect();
                let ok: Vec<&ReplicateRecord> = records.iter().filter(|x| x.error.is_none()).collect();
                let n_ok = ok.len();
                let (mut hits, mut tp, mut fp) = (0usize, 0.0, 0.0);
                for rec in &ok {
                    if !rec.detected.is_empty() {
                        hits += 1;
                    }
                    let (t, f) = tp_fp_rates(std::slice::from_ref(&rec.detected), &shared.truth, n);
                    tp += t;
                    fp += f;
                }
                let denom = n_ok.max(1) as f64;
                cells.push(CellResult {
                    method: arm.label(),
                    arm: *arm,
                    rho: cfg.rho_grid[r],
                    c: cfg.c_grid[c],
                    power: hits as f64 / denom,
                    tp: tp / denom,
                    fp: fp / denom,
                    n_ok,
                    n_fail: ns - n_ok,
                    records,
                });
            }
        }
    }
    for cell in cells.iter().filter(|c| c.n_fail > 0) {
        log::warn!("{} at ρ = {}, c = {}: {} failed replicate(s)", cell.method, cell.rho, cell.c, cell.n_fail);
    }
    Ok(SimResult {
        n_sites: n,
        true_cluster: shared.truth,
        replicates: ns,
        mc_replicates: cfg.mc_replicates,
        alpha_level: cfg.alpha_level,
        seed: cfg.seed,
        cells,
    })
}

/// Runs `methods`, with the SAR methods using the `weights` choice.
pub fn run_grid(cfg: &SimConfig, methods: &[ScanMethod], weights: WeightsMode) -> Result<SimResult> {
    let arms: Vec<Arm> = methods.iter().map(|&m| Arm::new(m, weights)).collect();
    run_arms(cfg, &arms)
}

/// Gaussian, p-sar and np-sar with the true matrix.
pub fn standard_arms() -> Vec<Arm> {
    [ScanMethod::Gaussian, ScanMethod::PSar, ScanMethod::NpSar]
        .into_iter()
        .map(|m| Arm::new(m, WeightsMode::True))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::build_contiguity;

    fn small_cfg() -> SimConfig {
        let l = layouts::lattice(4, 4);
        let w = row_standardize(&build_contiguity(16, &l.edges).unwrap());
        let truth = layouts::nearest_window(&l.layout, "r0c0", 3).unwrap();
        let mut cfg = SimConfig::desk(l.layout, w, truth);
        cfg.rho_grid = vec![0.0, 0.5];
        cfg.c_grid = vec![0.0, 1.0];
        cfg.replicates = 3;
        cfg.mc_replicates = 19;
        cfg.knn_range = (2, 4);
        cfg
    }

    #[test]
    fn delta_scaling() {
        let mut cfg = small_cfg();
        cfg.sigma = 0.0;
        cfg.alpha0 = 2.0;
        let y = generate_dataset(&cfg, 0.0, 1.0, &mut rng::stream(1, &[])).unwrap();
        for (i, v) in y.iter().enumerate() {
            let want = if cfg.true_cluster.contains(i) { 2.0 + std::f64::consts::SQRT_2 } else { 2.0 };
            assert!((v - want).abs() < 1e-15);
        }
    }

    #[test]
    fn filter_round_trip() {
        let cfg = small_cfg();
        let y = generate_dataset(&cfg, 0.5, 1.0, &mut rng::stream(7, &[])).unwrap();
        let f = spatial_filter(&y, &cfg.w_true, 0.5);
        let truth = cfg.true_cluster.indicator(16);
        let b = draw_innovation(16, &truth, 0.0, std::f64::consts::SQRT_2, 1.0, &mut rng::stream(7, &[]));
        for (u, v) in f.iter().zip(b.iter()) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn generator_matches_direct() {
        let cfg = small_cfg();
        let g = DataGenerator::new(&cfg).unwrap();
        let a = g.generate(0.5, 1.0, &mut rng::stream(3, &[])).unwrap();
        let b = generate_dataset(&cfg, 0.5, 1.0, &mut rng::stream(3, &[])).unwrap();
        assert_eq!(a, b);
        assert!(g.generate(0.3, 1.0, &mut rng::stream(3, &[])).is_err());
    }

    #[test]
    fn singular_rho_rejected() {
        let cfg = small_cfg();
        assert!(generate_dataset(&cfg, 1.0, 0.0, &mut rng::stream(1, &[])).is_err());
    }

    #[test]
    fn rates() {
        let truth: Vec<usize> = (0..8).collect();
        assert_eq!(tp_fp_rates(&[truth.clone()], &truth, 94), (1.0, 0.0));
        let away: Vec<usize> = (50..58).collect();
        assert_eq!(tp_fp_rates(&[away], &truth, 94), (0.0, 8.0 / 86.0));
        assert_eq!(tp_fp_rates(&[], &truth, 94), (0.0, 0.0));
        assert_eq!(tp_fp_rates(&[vec![0, 1], vec![1, 9]], &truth, 94), (0.25, 1.0 / 86.0));
    }

    #[test]
    fn grid_shape_and_labels() {
        let cfg = small_cfg();
        let mut arms = standard_arms();
        arms.push(Arm::new(ScanMethod::PSar, WeightsMode::KnnSelect));
        let res = run_arms(&cfg, &arms).unwrap();
        assert_eq!(res.cells.len(), 4 * 2 * 2);
        let csv = res.to_csv();
        assert_eq!(csv.lines().count(), 1 + 16);
        assert!(csv.contains("p-sar/knn-select,0.5,1,"));
        for c in &res.cells {
            assert!((0.0..=1.0).contains(&c.power));
            assert_eq!(c.records.len(), 3);
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = small_cfg();
        cfg.rho_grid.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.replicates = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.true_cluster.members.push(99);
        assert!(cfg.validate().is_err());
    }
}
