//! Gaussian and distribution-free scan statistics, their SAR-filtered
//! variants, Monte Carlo significance and sequential detection.
//!
//! Both concentration measures are functions of the between-group sum of
//! squares of the centred outcome, `B_k = S_k² · n / (n_k (n − n_k))` where
//! `S_k` is the centred sum inside the window:
//!
//! * Gaussian LLR: `−(n/2) · ln(1 − B_k / T)`, `T` the total sum of squares;
//! * distribution-free index: `√B_k`.
//!
//! The exhaustive scan therefore needs only one running sum per window row.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::sar::{estimate_rho, spatial_filter, LogDetEngine, RhoSelection};
use crate::spatial::{CandidateCluster, CandidateSet, SpatialDataset};
use crate::weights::WeightsMatrix;

use rand::seq::SliceRandom;

/// Which scan statistic to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScanMethod {
    #[serde(rename = "gaussian")]
    Gaussian,
    #[serde(rename = "df")]
    DistributionFree,
    #[serde(rename = "p-sar")]
    PSar,
    #[serde(rename = "np-sar")]
    NpSar,
}

impl ScanMethod {
    pub const ALL: [ScanMethod; 4] = [
        ScanMethod::Gaussian,
        ScanMethod::DistributionFree,
        ScanMethod::PSar,
        ScanMethod::NpSar,
    ];

    pub fn core(self) -> ScanCore {
        match self {
            ScanMethod::Gaussian | ScanMethod::PSar => ScanCore::Gaussian,
            ScanMethod::DistributionFree | ScanMethod::NpSar => ScanCore::DistributionFree,
        }
    }

    pub fn uses_sar(self) -> bool {
        matches!(self, ScanMethod::PSar | ScanMethod::NpSar)
    }

    pub fn label(self) -> &'static str {
        match self {
            ScanMethod::Gaussian => "gaussian",
            ScanMethod::DistributionFree => "df",
            ScanMethod::PSar => "p-sar",
            ScanMethod::NpSar => "np-sar",
        }
    }
}

impl std::fmt::Display for ScanMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ScanMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "gaussian" | "g" => Ok(ScanMethod::Gaussian),
            "df" | "distribution-free" => Ok(ScanMethod::DistributionFree),
            "p-sar" | "psar" => Ok(ScanMethod::PSar),
            "np-sar" | "npsar" => Ok(ScanMethod::NpSar),
            other => Err(Error::invalid(format!("unknown scan method '{other}'"))),
        }
    }
}

/// The concentration measure maximized over windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanCore {
    Gaussian,
    DistributionFree,
}

/// Null-hypothesis MLEs: common mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleH0 {
    pub alpha: f64,
    pub sigma2: f64,
}

/// Alternative-hypothesis MLEs: outside mean, mean shift inside, common variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleH1 {
    pub alpha: f64,
    pub delta: f64,
    pub sigma2: f64,
}

pub fn mle_h0(y: &[f64]) -> MleH0 {
    let n = y.len() as f64;
    let alpha = y.iter().sum::<f64>() / n;
    let sigma2 = y.iter().map(|v| (v - alpha).powi(2)).sum::<f64>() / n;
    MleH0 { alpha, sigma2 }
}

fn check_cluster(n: usize, cluster: &CandidateCluster) -> Result<()> {
    let nk = cluster.size();
    if nk == 0 || nk >= n {
        return Err(Error::invalid(format!("cluster size {nk} must satisfy 1 ≤ n_k < {n}")));
    }
    if cluster.members.iter().any(|&m| m >= n) {
        return Err(Error::invalid("cluster references a site outside the data"));
    }
    Ok(())
}

/// Closed-form MLEs under the one-window mean-shift model; the variance uses
/// the residual form with divisor `n`.
pub fn mle_h1(y: &[f64], cluster: &CandidateCluster) -> Result<MleH1> {
    let n = y.len();
    check_cluster(n, cluster)?;
    let xi = cluster.indicator(n);
    let nk = cluster.size() as f64;
    let nf = n as f64;
    let out_n = nf - nk;
    let alpha = y.iter().zip(&xi).filter(|(_, &x)| !x).map(|(v, _)| v).sum::<f64>() / out_n;
    let delta = y
        .iter()
        .zip(&xi)
        .map(|(v, &x)| (if x { nf / nk } else { 0.0 } - 1.0) * v)
        .sum::<f64>()
        / out_n;
    let sigma2 = y
        .iter()
        .zip(&xi)
        .map(|(v, &x)| (v - alpha - if x { delta } else { 0.0 }).powi(2))
        .sum::<f64>()
        / nf;
    Ok(MleH1 {
        alpha,
        delta,
        sigma2,
    })
}

/// Gaussian log-likelihood of the mean-shift model, without the `2π` constant.
pub fn gaussian_loglik(
    y: &[f64],
    alpha: f64,
    sigma2: f64,
    delta: f64,
    cluster: Option<&CandidateCluster>,
) -> f64 {
    let n = y.len();
    let xi = cluster.map(|c| c.indicator(n)).unwrap_or_else(|| vec![false; n]);
    let rss: f64 = y
        .iter()
        .zip(&xi)
        .map(|(v, &x)| (v - alpha - if x { delta } else { 0.0 }).powi(2))
        .sum();
    -(n as f64) / 2.0 * sigma2.ln() - rss / (2.0 * sigma2)
}

/// Log-likelihood ratio of one window: `(n/2)(ln σ̂² − ln σ̂²_k)`.
pub fn gaussian_llr(y: &[f64], cluster: &CandidateCluster) -> Result<f64> {
    let h0 = mle_h0(y);
    let h1 = mle_h1(y, cluster)?;
    if !(h1.sigma2 > h0.sigma2 * 1e-14) {
        return Err(Error::Degenerate(format!(
            "window centred at site {} leaves no residual variance",
            cluster.center
        )));
    }
    Ok(y.len() as f64 / 2.0 * (h0.sigma2.ln() - h1.sigma2.ln()))
}

/// Distribution-free concentration index
/// `√(n_k (n − n_k) / n) · |mean inside − mean outside|`.
pub fn df_index(y: &[f64], cluster: &CandidateCluster) -> Result<f64> {
    let n = y.len();
    check_cluster(n, cluster)?;
    let xi = cluster.indicator(n);
    let nk = cluster.size() as f64;
    let nf = n as f64;
    let (mut s_in, mut s_out) = (0.0, 0.0);
    for (v, &x) in y.iter().zip(&xi) {
        if x {
            s_in += v;
        } else {
            s_out += v;
        }
    }
    Ok((nk * (nf - nk) / nf).sqrt() * (s_in / nk - s_out / (nf - nk)).abs())
}

/// Best window of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Index into the candidate set.
    pub index: usize,
    pub cluster: CandidateCluster,
    pub statistic: f64,
}

/// Centred data and the quantities every scan over it shares.
pub(crate) struct ScanKernel {
    pub centered: Vec<f64>,
    pub total_ss: f64,
    kappa: Vec<f64>,
}

const DEGENERATE_TOL: f64 = 1e-12;

impl ScanKernel {
    pub fn new(y: &[f64]) -> Self {
        let n = y.len();
        let mean = y.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let total_ss = centered.iter().map(|v| v * v).sum();
        let nf = n as f64;
        let kappa = (0..n)
            .map(|m| if m == 0 { 0.0 } else { nf / (m as f64 * (nf - m as f64)) })
            .collect();
        ScanKernel {
            centered,
            total_ss,
            kappa,
        }
    }

    pub fn statistic(&self, core: ScanCore, between: f64) -> f64 {
        match core {
            ScanCore::Gaussian => {
                -(self.centered.len() as f64) / 2.0 * (-between / self.total_ss).ln_1p()
            }
            ScanCore::DistributionFree => between.sqrt(),
        }
    }

    /// Index and between-group sum of squares of the best active window in
    /// `values` (which must be a permutation of, or equal to, `self.centered`).
    pub fn best(
        &self,
        cands: &CandidateSet,
        values: &[f64],
        core: ScanCore,
        active: Option<&[bool]>,
    ) -> Option<(usize, f64)> {
        let limit = self.total_ss * (1.0 - DEGENERATE_TOL);
        let mut best: Option<(usize, f64, u32, u32)> = None;
        for r in 0..cands.n_rows() {
            let row = cands.row(r);
            let mut s = 0.0;
            let mut pos = 0usize;
            for k in cands.row_entry_range(r) {
                let e = cands.entry(k);
                let m = e.size as usize;
                while pos < m {
                    s += values[row[pos] as usize];
                    pos += 1;
                }
                if active.is_some_and(|a| !a[k]) {
                    continue;
                }
                let b = s * s * self.kappa[m];
                if core == ScanCore::Gaussian && !(b < limit) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((_, bb, bs, bc)) => {
                        b > bb || (b == bb && (e.size, e.center) < (bs, bc))
                    }
                };
                if better {
                    best = Some((k, b, e.size, e.center));
                }
            }
        }
        best.map(|(k, b, _, _)| (k, b))
    }

    fn null_replicate(&self, cands: &CandidateSet, core: ScanCore, seed: u64, r: usize) -> f64 {
        let mut perm = self.centered.clone();
        perm.shuffle(&mut rng::stream(seed, &[r as u64]));
        self.best(cands, &perm, core, None)
            .map(|(_, b)| self.statistic(core, b))
            .unwrap_or(0.0)
    }

    pub fn null_statistics(
        &self,
        cands: &CandidateSet,
        core: ScanCore,
        replicates: usize,
        seed: u64,
    ) -> Vec<f64> {
        (0..replicates)
            .into_par_iter()
            .map(|r| self.null_replicate(cands, core, seed, r))
            .collect()
    }
}

fn check_len(y: &[f64], cands: &CandidateSet) -> Result<()> {
    if y.len() != cands.n_sites() {
        return Err(Error::invalid(format!(
            "{} values for {} sites",
            y.len(),
            cands.n_sites()
        )));
    }
    if cands.is_empty() {
        return Err(Error::invalid("no candidate windows to scan"));
    }
    Ok(())
}

/// Exhaustive maximization over the candidate windows. Ties go to the smaller
/// window, then to the lower center index; degenerate windows are skipped.
pub fn scan(y: &[f64], cands: &CandidateSet, core: ScanCore) -> Result<ScanResult> {
    check_len(y, cands)?;
    let kernel = ScanKernel::new(y);
    let (index, b) = kernel
        .best(cands, &kernel.centered, core, None)
        .ok_or_else(|| Error::Degenerate("every candidate window is degenerate".into()))?;
    Ok(ScanResult {
        index,
        cluster: cands.cluster(index),
        statistic: kernel.statistic(core, b),
    })
}

/// `(1 + #{λ⁽ᵐ⁾ ≥ λ}) / (M + 1)`.
pub fn pvalue_from_null(lambda_obs: f64, null: &[f64]) -> f64 {
    let exceed = null.iter().filter(|&&l| l >= lambda_obs).count();
    (1 + exceed) as f64 / (null.len() + 1) as f64
}

fn check_replicates(m: usize) -> Result<()> {
    if m < 19 {
        return Err(Error::invalid(format!(
            "at least 19 Monte Carlo replicates are required, got {m}"
        )));
    }
    Ok(())
}

/// Scan statistics of `m` random permutations of `y`. Replicate `r` draws
/// from its own stream keyed by `(seed, r)`.
pub fn null_statistics(
    y: &[f64],
    cands: &CandidateSet,
    core: ScanCore,
    m: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_len(y, cands)?;
    check_replicates(m)?;
    Ok(ScanKernel::new(y).null_statistics(cands, core, m, seed))
}

/// Monte Carlo permutation p-value of an observed scan statistic.
pub fn mc_pvalue(
    lambda_obs: f64,
    y: &[f64],
    cands: &CandidateSet,
    core: ScanCore,
    m: usize,
    seed: u64,
) -> Result<f64> {
    Ok(pvalue_from_null(lambda_obs, &null_statistics(y, cands, core, m, seed)?))
}

/// A detected window with its significance and summary statistics of the
/// reporting outcome (the unfiltered, untransformed values).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    /// Detection order, 1 for the most likely cluster.
    pub rank: usize,
    pub cluster: CandidateCluster,
    pub statistic: f64,
    pub p_value: f64,
    pub mean_inside: f64,
    pub sd_inside: f64,
    pub mean_outside: f64,
    pub sd_outside: f64,
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn report(rank: usize, cluster: CandidateCluster, statistic: f64, p_value: f64, values: &[f64]) -> ClusterReport {
    let inside = cluster.indicator(values.len());
    let (mean_inside, sd_inside) =
        mean_sd(values.iter().zip(&inside).filter(|(_, &x)| x).map(|(v, _)| *v));
    let (mean_outside, sd_outside) =
        mean_sd(values.iter().zip(&inside).filter(|(_, &x)| !x).map(|(v, _)| *v));
    ClusterReport {
        rank,
        cluster,
        statistic,
        p_value,
        mean_inside,
        sd_inside,
        mean_outside,
        sd_outside,
    }
}

/// Monte Carlo and stopping settings for sequential detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub mc_replicates: usize,
    pub alpha_level: f64,
    pub max_clusters: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            mc_replicates: 999,
            alpha_level: 0.05,
            max_clusters: 10,
            seed: 1,
        }
    }
}

/// Result of sequential detection on one outcome vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialScan {
    /// The first-round window, reported whether or not it is significant.
    pub most_likely: ClusterReport,
    /// Significant windows in detection order; pairwise disjoint.
    pub clusters: Vec<ClusterReport>,
}

/// Sequential detection on `work` (the outcome actually scanned). The
/// permutation null is drawn once over the full candidate family and reused
/// for every round; each round drops the windows overlapping earlier
/// detections. Summary statistics come from `report_values`.
pub fn sequential_detect(
    work: &[f64],
    report_values: &[f64],
    cands: &CandidateSet,
    core: ScanCore,
    opts: &ScanOptions,
) -> Result<SequentialScan> {
    check_len(work, cands)?;
    check_replicates(opts.mc_replicates)?;
    if report_values.len() != work.len() {
        return Err(Error::invalid("report values and scanned values differ in length"));
    }
    if !(opts.alpha_level > 0.0 && opts.alpha_level <= 1.0) {
        return Err(Error::invalid(format!("alpha level {} outside (0, 1]", opts.alpha_level)));
    }
    let kernel = ScanKernel::new(work);
    let (first, b) = kernel
        .best(cands, &kernel.centered, core, None)
        .ok_or_else(|| Error::Degenerate("every candidate window is degenerate".into()))?;
    let null = kernel.null_statistics(cands, core, opts.mc_replicates, opts.seed);

    let lambda = kernel.statistic(core, b);
    let most_likely = report(1, cands.cluster(first), lambda, pvalue_from_null(lambda, &null), report_values);

    let mut clusters = Vec::new();
    let mut active = vec![true; cands.len()];
    let mut next = Some((first, b));
    while let Some((k, b)) = next {
        if clusters.len() >= opts.max_clusters {
            break;
        }
        let lambda = kernel.statistic(core, b);
        let p = pvalue_from_null(lambda, &null);
        if p > opts.alpha_level {
            break;
        }
        let rep = report(clusters.len() + 1, cands.cluster(k), lambda, p, report_values);
        let hit = cands.intersecting(&rep.cluster.indicator(work.len()));
        for (a, h) in active.iter_mut().zip(hit) {
            *a &= !h;
        }
        clusters.push(rep);
        next = kernel.best(cands, &kernel.centered, core, Some(&active));
    }
    Ok(SequentialScan {
        most_likely,
        clusters,
    })
}

/// Transform applied to the outcome before analysis. Reports always use the
/// original scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    Identity,
    Log,
}

impl Transform {
    pub fn apply(self, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            Transform::Identity => Ok(y.to_vec()),
            Transform::Log => y
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if v > 0.0 {
                        Ok(v.ln())
                    } else {
                        Err(Error::invalid(format!(
                            "log transform needs positive values; site {i} has {v}"
                        )))
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub scan: ScanOptions,
    pub max_fraction: f64,
    pub transform: Transform,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            scan: ScanOptions::default(),
            max_fraction: 0.5,
            transform: Transform::Identity,
        }
    }
}

/// Full output of [`detect`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub method: ScanMethod,
    pub most_likely: ClusterReport,
    pub clusters: Vec<ClusterReport>,
    /// Spatial-parameter selection, for the SAR methods.
    pub rho: Option<RhoSelection>,
}

/// End-to-end detection: enumerate windows, filter the outcome for the SAR
/// methods, then detect clusters sequentially.
pub fn detect(
    ds: &SpatialDataset,
    w: Option<&WeightsMatrix>,
    method: ScanMethod,
    cfg: &DetectConfig,
) -> Result<Detection> {
    let cands = CandidateSet::circular(ds.layout(), cfg.max_fraction)?;
    let analysis = cfg.transform.apply(ds.values())?;
    let (work, rho) = if method.uses_sar() {
        let w = w.ok_or_else(|| {
            Error::invalid(format!("method {method} needs a spatial weights matrix"))
        })?;
        if w.n() != ds.len() {
            return Err(Error::invalid(format!(
                "weights matrix is {}×{} but the dataset has {} sites",
                w.n(),
                w.n(),
                ds.len()
            )));
        }
        let engine = LogDetEngine::new(w)?;
        let sel = estimate_rho(&analysis, w, &cands, &engine)?;
        (spatial_filter(&analysis, w, sel.rho_hat), Some(sel))
    } else {
        (analysis, None)
    };
    let seq = sequential_detect(&work, ds.values(), &cands, method.core(), &cfg.scan)?;
    Ok(Detection {
        method,
        most_likely: seq.most_likely,
        clusters: seq.clusters,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{Layout, Site};

    fn cluster(center: usize, members: &[usize]) -> CandidateCluster {
        CandidateCluster {
            center,
            radius: 0.0,
            members: members.to_vec(),
        }
    }

    #[test]
    fn h0_population_variance() {
        let h0 = mle_h0(&[1.0, 2.0, 3.0]);
        assert_eq!(h0.alpha, 2.0);
        assert!((h0.sigma2 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn h1_hand_values() {
        let h1 = mle_h1(&[0.0, 1.0, 3.0, 4.0], &cluster(2, &[2, 3])).unwrap();
        assert!((h1.alpha - 0.5).abs() < 1e-15);
        assert!((h1.delta - 3.0).abs() < 1e-15);
        assert!((h1.sigma2 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn llr_hand_value() {
        let l = gaussian_llr(&[0.0, 1.0, 3.0, 4.0], &cluster(2, &[2, 3])).unwrap();
        assert!((l - 2.0 * 10f64.ln()).abs() < 1e-12, "{l}");
        assert!((l - 4.605_170_185_988_09).abs() < 1e-12);
    }

    #[test]
    fn llr_zero_for_balanced_split() {
        let l = gaussian_llr(&[1.0, 2.0, 1.0, 2.0], &cluster(0, &[0, 1])).unwrap();
        assert!(l.abs() < 1e-15);
    }

    #[test]
    fn llr_degenerate_window() {
        let e = gaussian_llr(&[1.0, 1.0, 5.0, 5.0], &cluster(2, &[2, 3]));
        assert!(matches!(e, Err(Error::Degenerate(_))));
    }

    #[test]
    fn df_hand_values() {
        let d = df_index(&[0.0, 1.0, 3.0, 4.0], &cluster(2, &[2, 3])).unwrap();
        assert!((d - 3.0).abs() < 1e-15);
        let z = df_index(&[1.0, 2.0, 2.0, 1.0], &cluster(0, &[0, 1])).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn invalid_cluster_sizes() {
        assert!(mle_h1(&[1.0, 2.0], &cluster(0, &[0, 1])).is_err());
        assert!(df_index(&[1.0, 2.0], &cluster(0, &[])).is_err());
    }

    #[test]
    fn pvalue_arithmetic() {
        let null: Vec<f64> = (0..999).map(|i| i as f64).collect();
        assert_eq!(pvalue_from_null(1e9, &null), 0.001);
        assert_eq!(pvalue_from_null(-1.0, &null), 1.0);
        // exactly 500 replicates at or above 499
        assert_eq!(pvalue_from_null(499.0, &null), 0.501);
    }

    fn four_sites() -> Layout {
        Layout::new(
            [(0.0, 0.0), (1.0, 0.0), (5.0, 0.0), (6.0, 0.0)]
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| Site::new(format!("{i}"), x, y))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn gaussian_and_df_share_argmax() {
        let cands = CandidateSet::circular(&four_sites(), 0.5).unwrap();
        let y = [0.0, 1.0, 3.0, 4.0];
        let g = scan(&y, &cands, ScanCore::Gaussian).unwrap();
        let d = scan(&y, &cands, ScanCore::DistributionFree).unwrap();
        assert_eq!(g.cluster, d.cluster);
        assert_eq!(g.cluster.members, vec![0, 1], "complementary windows tie; lower center wins");
        assert!((g.statistic - 2.0 * 10f64.ln()).abs() < 1e-12);
        assert!((d.statistic - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_candidate_scan() {
        let c = cluster(1, &[1]);
        let cands = CandidateSet::from_clusters(4, std::slice::from_ref(&c)).unwrap();
        let y = [0.0, 2.0, 0.5, 0.1];
        let r = scan(&y, &cands, ScanCore::Gaussian).unwrap();
        assert_eq!(r.cluster.members, c.members);
        assert!((r.statistic - gaussian_llr(&y, &c).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn all_degenerate_is_an_error() {
        let cands = CandidateSet::circular(&four_sites(), 0.5).unwrap();
        assert!(scan(&[2.0; 4], &cands, ScanCore::Gaussian).is_err());
    }

    #[test]
    fn too_few_replicates() {
        let cands = CandidateSet::circular(&four_sites(), 0.5).unwrap();
        assert!(mc_pvalue(1.0, &[0.0, 1.0, 3.0, 4.0], &cands, ScanCore::Gaussian, 10, 1).is_err());
    }

    #[test]
    fn log_transform() {
        assert!(Transform::Log.apply(&[1.0, 0.0]).is_err());
        let v = Transform::Log.apply(&[1.0, std::f64::consts::E]).unwrap();
        assert!((v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn method_parsing() {
        for m in ScanMethod::ALL {
            assert_eq!(m.label().parse::<ScanMethod>().unwrap(), m);
        }
        assert!("kulldorff".parse::<ScanMethod>().is_err());
    }
}
