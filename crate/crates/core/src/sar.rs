//! Spatial autoregressive (lag) model: spatial filtering, log-determinant
//! evaluation, concentrated quasi-maximum likelihood, and BIC-based choice of
//! the autoregressive parameter between the null model and the best
//! one-window alternative.
//!
//! The intercept, mean shift and variance are profiled out, leaving a scalar
//! problem in ρ:
//!
//! ```text
//! ℓ(ρ) = ln det(I − ρW) − (n/2) ln(RSS(ρ)/n) − n/2
//! ```
//!
//! where `RSS(ρ)` is the residual sum of squares of the filtered outcome
//! `(I − ρW)y` regressed on the intercept (and window indicator). Because the
//! filter is linear in ρ, `RSS(ρ) = c0 − 2ρ·c1 + ρ²·c2` is an exact quadratic,
//! and the log-determinant is a sum over a spectrum computed once per W.

use std::collections::VecDeque;

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::brent_maximize;
use crate::scan::{mle_h0, mle_h1};
use crate::spatial::{CandidateCluster, CandidateSet};
use crate::weights::WeightsMatrix;

/// `(I − ρW)·y`.
pub fn spatial_filter(y: &[f64], w: &WeightsMatrix, rho: f64) -> Vec<f64> {
    let lag = w.lag(y);
    y.iter().zip(lag).map(|(v, l)| v - rho * l).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogDetMode {
    /// W is similar to a symmetric matrix; real spectrum.
    SymmetricSpectrum,
    /// General W; complex spectrum from a real Schur form.
    ComplexSpectrum,
    /// LU factorization at every evaluation.
    Dense,
}

/// Largest `n` accepted by the dense fallback.
pub const DEFAULT_DENSE_CAP: usize = 5000;

/// Cells of the coarse ρ grid used to bracket maximizers and bound profiles.
const GRID_CELLS: usize = 64;
/// Width of the final bracket around each ρ estimate.
const RHO_BRACKET: f64 = 1e-7;
const MARGIN: f64 = 1e-6;

#[derive(Debug, Clone)]
struct RhoGrid {
    nodes: Vec<f64>,
    logdet: Vec<f64>,
    /// Upper bound of the log-determinant on each cell (spectral modes only).
    cell_max: Option<Vec<f64>>,
}

/// Evaluates `ln det(I − ρW)` on the admissible interval of ρ.
#[derive(Debug, Clone)]
pub struct LogDetEngine {
    n: usize,
    mode: LogDetMode,
    eig_re: Vec<f64>,
    eig_im: Vec<f64>,
    dense: Option<DMatrix<f64>>,
    interval: (f64, f64),
    search: (f64, f64),
    grid: RhoGrid,
}

/// Diagonal scaling `r` with `r_i w_ij = r_j w_ji`, if one exists; then
/// `R^{1/2} W R^{-1/2}` is symmetric. Row-standardized symmetric matrices
/// always admit one (the original row sums).
fn symmetrizing_scale(w: &WeightsMatrix) -> Option<Vec<f64>> {
    let n = w.n();
    let mut r = vec![0.0f64; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if r[root] != 0.0 {
            continue;
        }
        r[root] = 1.0;
        queue.push_back(root);
        while let Some(i) = queue.pop_front() {
            for (j, wij) in w.row(i) {
                let wji = w.get(j, i);
                if wji == 0.0 {
                    return None;
                }
                let rj = r[i] * wij / wji;
                if r[j] == 0.0 {
                    r[j] = rj;
                    queue.push_back(j);
                } else if (r[j] - rj).abs() > 1e-10 * r[j].abs().max(rj.abs()) {
                    return None;
                }
            }
        }
    }
    Some(r)
}

fn grid_nodes(lo: f64, hi: f64) -> Vec<f64> {
    (0..=GRID_CELLS)
        .map(|g| lo + (hi - lo) * g as f64 / GRID_CELLS as f64)
        .collect()
}

impl LogDetEngine {
    pub fn new(w: &WeightsMatrix) -> Result<Self> {
        Self::with_dense_cap(w, DEFAULT_DENSE_CAP)
    }

    /// Spectral engine when possible, LU fallback otherwise.
    pub fn with_dense_cap(w: &WeightsMatrix, dense_cap: usize) -> Result<Self> {
        check_weights(w)?;
        let n = w.n();
        if let Some(r) = symmetrizing_scale(w) {
            let mut s = DMatrix::zeros(n, n);
            for (i, j, wij) in w.triplets() {
                s[(i, j)] = wij * (r[i] / r[j]).sqrt();
            }
            // exact symmetry so the symmetric solver sees a symmetric input
            let s = (&s + s.transpose()) * 0.5;
            let eig = SymmetricEigen::new(s);
            let re: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            let im = vec![0.0; n];
            return Self::from_spectrum(w, LogDetMode::SymmetricSpectrum, re, im);
        }
        // deflation at machine epsilon stalls on many row-stochastic matrices
        let iters = 1000 * n.max(10);
        for eps in [1e-14, 1e-12] {
            if let Some(schur) = Schur::try_new(w.to_dense(), eps, iters) {
                let ev = schur.complex_eigenvalues();
                let re = ev.iter().map(|c| c.re).collect();
                let im = ev.iter().map(|c| c.im).collect();
                return Self::from_spectrum(w, LogDetMode::ComplexSpectrum, re, im);
            }
        }
        log::warn!("Schur decomposition did not converge; using dense log-determinants");
        Self::dense_with_cap(w, dense_cap)
    }

    /// LU-based engine, bypassing spectral decomposition.
    pub fn dense(w: &WeightsMatrix) -> Result<Self> {
        Self::dense_with_cap(w, DEFAULT_DENSE_CAP)
    }

    fn dense_with_cap(w: &WeightsMatrix, cap: usize) -> Result<Self> {
        check_weights(w)?;
        let n = w.n();
        if n > cap {
            return Err(Error::invalid(format!(
                "{n} sites exceed the dense log-determinant cap of {cap}; use a weights \
                 matrix similar to a symmetric one (e.g. a row-standardized symmetric matrix)"
            )));
        }
        let bound = if w.is_row_standardized() {
            1.0
        } else {
            1.0 / w.row_sums().into_iter().fold(0.0, f64::max)
        };
        let interval = (-bound, bound);
        let mut engine = LogDetEngine {
            n,
            mode: LogDetMode::Dense,
            eig_re: Vec::new(),
            eig_im: Vec::new(),
            dense: Some(w.to_dense()),
            interval,
            search: shrink(interval),
            grid: RhoGrid {
                nodes: Vec::new(),
                logdet: Vec::new(),
                cell_max: None,
            },
        };
        engine.fill_grid();
        Ok(engine)
    }

    fn from_spectrum(w: &WeightsMatrix, mode: LogDetMode, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        let scale = re
            .iter()
            .zip(&im)
            .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
        let real: Vec<f64> = re
            .iter()
            .zip(&im)
            .filter(|(_, b)| b.abs() <= 1e-10 * scale)
            .map(|(a, _)| *a)
            .collect();
        let lmax = real.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lmin = real.iter().copied().fold(f64::INFINITY, f64::min);
        if !(lmax > 0.0) {
            return Err(Error::numerical(
                "weights matrix has no positive real eigenvalue; ρ interval is unbounded",
            ));
        }
        let hi = if w.is_row_standardized() { 1.0 } else { 1.0 / lmax };
        let lo = if lmin < 0.0 { 1.0 / lmin } else { -hi };
        let interval = (lo, hi);
        let mut engine = LogDetEngine {
            n: w.n(),
            mode,
            eig_re: re,
            eig_im: im,
            dense: None,
            interval,
            search: shrink(interval),
            grid: RhoGrid {
                nodes: Vec::new(),
                logdet: Vec::new(),
                cell_max: None,
            },
        };
        engine.fill_grid();
        Ok(engine)
    }

    fn fill_grid(&mut self) {
        let nodes = grid_nodes(self.search.0, self.search.1);
        let logdet = nodes.iter().map(|&r| self.logdet(r)).collect();
        let cell_max = (self.mode != LogDetMode::Dense).then(|| {
            nodes
                .windows(2)
                .map(|c| {
                    self.eig_re
                        .iter()
                        .zip(&self.eig_im)
                        .map(|(&re, &im)| {
                            log_abs_factor(c[0], re, im).max(log_abs_factor(c[1], re, im))
                        })
                        .sum()
                })
                .collect()
        });
        self.grid = RhoGrid {
            nodes,
            logdet,
            cell_max,
        };
    }

    pub fn mode(&self) -> LogDetMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Open interval of ρ on which `I − ρW` is nonsingular.
    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Admissible interval shrunk by a relative margin of 1e-6 on each side.
    pub fn search_interval(&self) -> (f64, f64) {
        self.search
    }

    /// Eigenvalues as `(re, im)` pairs; empty in dense mode.
    pub fn spectrum(&self) -> Vec<(f64, f64)> {
        self.eig_re.iter().copied().zip(self.eig_im.iter().copied()).collect()
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho > self.interval.0 && rho < self.interval.1
    }

    pub fn check_rho(&self, rho: f64) -> Result<()> {
        if self.contains(rho) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "ρ = {rho} outside the admissible interval ({}, {})",
                self.interval.0, self.interval.1
            )))
        }
    }

    /// `ln det(I − ρW)`. Only meaningful inside [`Self::interval`].
    pub fn logdet(&self, rho: f64) -> f64 {
        match self.mode {
            LogDetMode::SymmetricSpectrum => self.eig_re.iter().map(|&l| (1.0 - rho * l).ln()).sum(),
            LogDetMode::ComplexSpectrum => self
                .eig_re
                .iter()
                .zip(&self.eig_im)
                .map(|(&re, &im)| log_abs_factor(rho, re, im))
                .sum(),
            LogDetMode::Dense => {
                let w = self.dense.as_ref().expect("dense engine keeps W");
                let m = DMatrix::identity(self.n, self.n) - w * rho;
                let lu = m.lu();
                let u = lu.u();
                (0..self.n).map(|i| u[(i, i)].abs().ln()).sum()
            }
        }
    }
}

#[inline]
fn log_abs_factor(rho: f64, re: f64, im: f64) -> f64 {
    let a = 1.0 - rho * re;
    let b = rho * im;
    0.5 * (a * a + b * b).ln()
}

fn shrink((lo, hi): (f64, f64)) -> (f64, f64) {
    let m = MARGIN * (hi - lo);
    (lo + m, hi - m)
}

fn check_weights(w: &WeightsMatrix) -> Result<()> {
    if w.nnz() == 0 {
        return Err(Error::invalid("weights matrix has no nonzero entry"));
    }
    Ok(())
}

/// Alias of [`LogDetEngine::new`].
pub fn make_logdet_engine(w: &WeightsMatrix) -> Result<LogDetEngine> {
    LogDetEngine::new(w)
}

/// Residual sum of squares of the filtered regression as a function of ρ:
/// `c0 − 2ρ·c1 + ρ²·c2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RssQuadratic {
    c0: f64,
    c1: f64,
    c2: f64,
}

impl RssQuadratic {
    /// Within-group sums of squares and cross-products of `y` and its lag.
    fn from_groups(y: &[f64], lag: &[f64], inside: Option<&[bool]>) -> Self {
        let groups: &[bool] = &[false, true];
        let mut q = RssQuadratic {
            c0: 0.0,
            c1: 0.0,
            c2: 0.0,
        };
        for &g in groups {
            let member = |i: usize| inside.map_or(!g, |m| m[i] == g);
            let idx: Vec<usize> = (0..y.len()).filter(|&i| member(i)).collect();
            if idx.is_empty() {
                continue;
            }
            let m = idx.len() as f64;
            let ma = idx.iter().map(|&i| y[i]).sum::<f64>() / m;
            let mb = idx.iter().map(|&i| lag[i]).sum::<f64>() / m;
            for &i in &idx {
                let a = y[i] - ma;
                let b = lag[i] - mb;
                q.c0 += a * a;
                q.c1 += a * b;
                q.c2 += b * b;
            }
        }
        q
    }

    #[inline]
    fn eval(&self, rho: f64) -> f64 {
        self.c0 - 2.0 * rho * self.c1 + rho * rho * self.c2
    }

    /// Minimum over `[a, b]`.
    #[inline]
    fn min_on(&self, a: f64, b: f64) -> f64 {
        let mut m = self.eval(a).min(self.eval(b));
        if self.c2 > 0.0 {
            let v = self.c1 / self.c2;
            if v > a && v < b {
                m = m.min(self.eval(v));
            }
        }
        m
    }
}

#[inline]
fn profile_value(logdet: f64, rss: f64, n: f64) -> f64 {
    if rss > 0.0 {
        logdet - 0.5 * n * (rss / n).ln() - 0.5 * n
    } else {
        f64::NEG_INFINITY
    }
}

struct ProfileMax {
    rho: f64,
    loglik: f64,
    boundary: bool,
}

/// Grid bracketing, then Brent refinement around the best node.
fn maximize_profile(engine: &LogDetEngine, q: &RssQuadratic, n: usize) -> Option<ProfileMax> {
    let nf = n as f64;
    let g = &engine.grid;
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, (&r, &ld)) in g.nodes.iter().zip(&g.logdet).enumerate() {
        let v = profile_value(ld, q.eval(r), nf);
        if v > best.1 {
            best = (k, v);
        }
    }
    if !best.1.is_finite() {
        return None;
    }
    let (k, v) = best;
    let a = g.nodes[k.saturating_sub(1)];
    let b = g.nodes[(k + 1).min(GRID_CELLS)];
    let m = brent_maximize(
        |r| profile_value(engine.logdet(r), q.eval(r), nf),
        a,
        b,
        Some((g.nodes[k], v)),
        RHO_BRACKET,
    );
    let (lo, hi) = engine.search;
    Some(ProfileMax {
        rho: m.x,
        loglik: m.value,
        boundary: m.x - lo <= 2.0 * RHO_BRACKET || hi - m.x <= 2.0 * RHO_BRACKET,
    })
}

/// Profiled log-likelihood and the parameter values attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentratedLoglik {
    pub loglik: f64,
    pub alpha: f64,
    pub delta: Option<f64>,
    pub sigma2: f64,
}

/// Concentrated log-likelihood at a fixed ρ, computed by filtering the
/// outcome and applying the closed-form MLEs. The `−(n/2) ln 2π` constant
/// is omitted.
pub fn concentrated_loglik(
    y: &[f64],
    w: &WeightsMatrix,
    cluster: Option<&CandidateCluster>,
    rho: f64,
    engine: &LogDetEngine,
) -> Result<ConcentratedLoglik> {
    check_dims(y, w, engine)?;
    engine.check_rho(rho)?;
    let yf = spatial_filter(y, w, rho);
    let (alpha, delta, sigma2) = match cluster {
        None => {
            let h0 = mle_h0(&yf);
            (h0.alpha, None, h0.sigma2)
        }
        Some(c) => {
            let h1 = mle_h1(&yf, c)?;
            (h1.alpha, Some(h1.delta), h1.sigma2)
        }
    };
    if !(sigma2 > 0.0) {
        return Err(Error::Degenerate(format!("filtered outcome has zero residual variance at ρ = {rho}")));
    }
    let n = y.len() as f64;
    Ok(ConcentratedLoglik {
        loglik: engine.logdet(rho) - 0.5 * n * sigma2.ln() - 0.5 * n,
        alpha,
        delta,
        sigma2,
    })
}

fn check_dims(y: &[f64], w: &WeightsMatrix, engine: &LogDetEngine) -> Result<()> {
    if y.len() != w.n() || engine.n() != w.n() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} values, {}-site W, {}-site engine",
            y.len(),
            w.n(),
            engine.n()
        )));
    }
    Ok(())
}

/// One fitted SAR model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SarFit {
    pub alpha: f64,
    /// Mean shift inside the window; `None` under the null model.
    pub delta: Option<f64>,
    pub sigma2: f64,
    pub rho: f64,
    /// Maximized log-likelihood without the `2π` constant.
    pub loglik: f64,
    pub bic: f64,
    /// Number of estimated parameters (3 null, 4 with a window).
    pub p: usize,
    pub cluster: Option<CandidateCluster>,
    /// The maximizer sits at the edge of the search interval.
    pub boundary: bool,
}

fn finish_fit(
    y: &[f64],
    w: &WeightsMatrix,
    cluster: Option<CandidateCluster>,
    max: ProfileMax,
) -> Result<SarFit> {
    let n = y.len();
    let yf = spatial_filter(y, w, max.rho);
    let (alpha, delta, sigma2) = match &cluster {
        None => {
            let h = mle_h0(&yf);
            (h.alpha, None, h.sigma2)
        }
        Some(c) => {
            let h = mle_h1(&yf, c)?;
            (h.alpha, Some(h.delta), h.sigma2)
        }
    };
    let p = if cluster.is_some() { 4 } else { 3 };
    if max.boundary {
        log::debug!("ρ estimate {} sits on the search boundary", max.rho);
    }
    Ok(SarFit {
        alpha,
        delta,
        sigma2,
        rho: max.rho,
        loglik: max.loglik,
        bic: p as f64 * (n as f64).ln() - 2.0 * max.loglik,
        p,
        cluster,
        boundary: max.boundary,
    })
}

/// Maximizes the concentrated log-likelihood over ρ.
pub fn fit_sar(
    y: &[f64],
    w: &WeightsMatrix,
    cluster: Option<&CandidateCluster>,
    engine: &LogDetEngine,
) -> Result<SarFit> {
    check_dims(y, w, engine)?;
    let n = y.len();
    let lag = w.lag(y);
    let inside = match cluster {
        Some(c) => {
            if c.size() == 0 || c.size() >= n || c.members.iter().any(|&m| m >= n) {
                return Err(Error::invalid(format!("window of size {} is invalid for {n} sites", c.size())));
            }
            Some(c.indicator(n))
        }
        None => None,
    };
    let q = RssQuadratic::from_groups(y, &lag, inside.as_deref());
    let max = maximize_profile(engine, &q, n)
        .ok_or_else(|| Error::Degenerate("filtered outcome has zero residual variance".into()))?;
    finish_fit(y, w, cluster.cloned(), max)
}

/// Choice of ρ̂ between the null fit and the best one-window fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoSelection {
    pub rho_hat: f64,
    /// `BIC_0 − BIC_k*`.
    pub delta_bic: f64,
    pub best_cluster: Option<CandidateCluster>,
    pub fit_h0: SarFit,
    pub fit_best: SarFit,
}

/// BIC gap above which the best-window fit is preferred.
pub const BIC_THRESHOLD: f64 = 10.0;

/// Applies the selection rule: ρ̂ from the best-window fit when
/// `BIC_0 − BIC_k* > 10` and that fit is interior, from the null fit otherwise.
pub fn select_rho(fit_h0: SarFit, fit_best: SarFit) -> RhoSelection {
    let delta_bic = fit_h0.bic - fit_best.bic;
    let use_best = delta_bic > BIC_THRESHOLD && !fit_best.boundary;
    RhoSelection {
        rho_hat: if use_best { fit_best.rho } else { fit_h0.rho },
        delta_bic,
        best_cluster: fit_best.cluster.clone(),
        fit_h0,
        fit_best,
    }
}

/// Per-candidate profile coefficients from running sums along window rows.
fn candidate_quadratics(y: &[f64], lag: &[f64], cands: &CandidateSet) -> Vec<RssQuadratic> {
    let n = y.len();
    let nf = n as f64;
    let ma = y.iter().sum::<f64>() / nf;
    let mb = lag.iter().sum::<f64>() / nf;
    let a: Vec<f64> = y.iter().map(|v| v - ma).collect();
    let b: Vec<f64> = lag.iter().map(|v| v - mb).collect();
    let taa: f64 = a.iter().map(|v| v * v).sum();
    let tab: f64 = a.iter().zip(&b).map(|(u, v)| u * v).sum();
    let tbb: f64 = b.iter().map(|v| v * v).sum();

    let mut out = vec![RssQuadratic { c0: 0.0, c1: 0.0, c2: 0.0 }; cands.len()];
    for r in 0..cands.n_rows() {
        let row = cands.row(r);
        let (mut sa, mut sb) = (0.0, 0.0);
        let mut pos = 0;
        for k in cands.row_entry_range(r) {
            let m = cands.entry(k).size as usize;
            while pos < m {
                let i = row[pos] as usize;
                sa += a[i];
                sb += b[i];
                pos += 1;
            }
            let kappa = nf / (m as f64 * (nf - m as f64));
            out[k] = RssQuadratic {
                c0: taa - kappa * sa * sa,
                c1: tab - kappa * sa * sb,
                c2: tbb - kappa * sb * sb,
            };
        }
    }
    out
}

/// Fits the null SAR model and every one-window SAR model, then applies
/// [`select_rho`].
///
/// Windows whose likelihood provably cannot reach the best value seen at a
/// shared grid node are skipped without a full fit: on each grid cell the
/// profile is bounded by the cell's log-determinant bound and the minimum
/// of the window's residual quadratic. The returned best fit is the one an
/// exhaustive search over all windows would return.
pub fn estimate_rho(
    y: &[f64],
    w: &WeightsMatrix,
    cands: &CandidateSet,
    engine: &LogDetEngine,
) -> Result<RhoSelection> {
    check_dims(y, w, engine)?;
    if cands.is_empty() {
        return Err(Error::invalid("no candidate windows"));
    }
    if cands.n_sites() != y.len() {
        return Err(Error::invalid("candidate windows are defined over a different site count"));
    }
    let fit_h0 = fit_sar(y, w, None, engine)?;
    let n = y.len();
    let nf = n as f64;
    let lag = w.lag(y);
    let quads = candidate_quadratics(y, &lag, cands);
    let grid = &engine.grid;

    // lower bounds at the grid node closest to the null estimate
    let g0 = grid
        .nodes
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - fit_h0.rho).abs().total_cmp(&(b.1 - fit_h0.rho).abs()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let (r0, ld0) = (grid.nodes[g0], grid.logdet[g0]);
    let floor = quads
        .iter()
        .map(|q| profile_value(ld0, q.eval(r0), nf))
        .fold(f64::NEG_INFINITY, f64::max);

    // upper bound per candidate; NaN marks "no bound available"
    let upper = |q: &RssQuadratic| -> f64 {
        match &grid.cell_max {
            Some(cell_max) => grid
                .nodes
                .windows(2)
                .zip(cell_max)
                .map(|(c, &lm)| profile_value(lm, q.min_on(c[0], c[1]), nf))
                .fold(f64::NEG_INFINITY, f64::max),
            None => f64::INFINITY,
        }
    };

    let mut order: Vec<(usize, f64)> = if floor.is_finite() {
        let slack = 1e-9 * (1.0 + floor.abs());
        // cheap per-cell screen, no logarithms: q_min ≤ n·exp(2(bound − floor)/n − 1)
        let thresholds: Option<Vec<f64>> = grid.cell_max.as_ref().map(|cm| {
            cm.iter()
                .map(|&lm| nf * (2.0 * (lm - floor + slack) / nf - 1.0).exp())
                .collect()
        });
        quads
            .iter()
            .enumerate()
            .filter(|(_, q)| match &thresholds {
                Some(th) => grid
                    .nodes
                    .windows(2)
                    .zip(th)
                    .any(|(c, &t)| q.min_on(c[0], c[1]) <= t),
                None => true,
            })
            .map(|(k, q)| (k, upper(q)))
            .collect()
    } else {
        quads.iter().enumerate().map(|(k, q)| (k, upper(q))).collect()
    };
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut best: Option<(usize, ProfileMax)> = None;
    let mut failures = 0usize;
    for (k, ub) in order {
        if let Some((_, b)) = &best {
            if ub < b.loglik - 1e-9 * (1.0 + b.loglik.abs()) {
                break;
            }
        }
        match maximize_profile(engine, &quads[k], n) {
            Some(m) => {
                let better = match &best {
                    None => true,
                    Some((bk, b)) => m.loglik > b.loglik || (m.loglik == b.loglik && k < *bk),
                };
                if better {
                    best = Some((k, m));
                }
            }
            None => failures += 1,
        }
    }
    if failures > 0 {
        log::warn!("{failures} candidate window(s) skipped: degenerate filtered regression");
    }
    let (k, max) = best.ok_or_else(|| Error::Degenerate("every candidate SAR fit failed".into()))?;
    let fit_best = finish_fit(y, w, Some(cands.cluster(k)), max)?;
    Ok(select_rho(fit_h0, fit_best))
}

/// Exhaustive variant of [`estimate_rho`] that fits every window. Slow;
/// kept for verification.
pub fn estimate_rho_exhaustive(
    y: &[f64],
    w: &WeightsMatrix,
    cands: &CandidateSet,
    engine: &LogDetEngine,
) -> Result<RhoSelection> {
    check_dims(y, w, engine)?;
    let fit_h0 = fit_sar(y, w, None, engine)?;
    let n = y.len();
    let lag = w.lag(y);
    let quads = candidate_quadratics(y, &lag, cands);
    let mut best: Option<(usize, ProfileMax)> = None;
    for (k, q) in quads.iter().enumerate() {
        if let Some(m) = maximize_profile(engine, q, n) {
            if best.as_ref().is_none_or(|(_, b)| m.loglik > b.loglik) {
                best = Some((k, m));
            }
        }
    }
    let (k, max) = best.ok_or_else(|| Error::Degenerate("every candidate SAR fit failed".into()))?;
    let fit_best = finish_fit(y, w, Some(cands.cluster(k)), max)?;
    Ok(select_rho(fit_h0, fit_best))
}
