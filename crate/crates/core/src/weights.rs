//! Spatial weights matrices, row standardization, Moran's I, and selection
//! of a weights matrix from a candidate family.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::DistanceMatrix;

/// How a weights matrix was built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    Contiguity,
    Knn { k: usize },
    InverseDistance { power: f64, cutoff: Option<f64> },
    Custom,
}

impl std::fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightScheme::Contiguity => write!(f, "contiguity"),
            WeightScheme::Knn { k } => write!(f, "knn({k})"),
            WeightScheme::InverseDistance { power, cutoff: None } => {
                write!(f, "inverse_distance({power})")
            }
            WeightScheme::InverseDistance {
                power,
                cutoff: Some(c),
            } => write!(f, "inverse_distance({power}, cutoff={c})"),
            WeightScheme::Custom => write!(f, "custom"),
        }
    }
}

/// Sparse nonnegative `n × n` matrix with zero diagonal, stored row-wise with
/// columns in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightsMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    row_standardized: bool,
    scheme: WeightScheme,
}

impl WeightsMatrix {
    /// Builds from `(i, j, w_ij)` triplets. Self-loops, non-positive or
    /// non-finite weights, out-of-range indices and repeated pairs are rejected.
    pub fn from_triplets(
        n: usize,
        mut triplets: Vec<(usize, usize, f64)>,
        scheme: WeightScheme,
    ) -> Result<Self> {
        for &(i, j, w) in &triplets {
            if i >= n || j >= n {
                return Err(Error::invalid(format!(
                    "weight ({i}, {j}) out of range for {n} sites"
                )));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop weight at site {i}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!(
                    "weight ({i}, {j}) = {w} must be finite and positive"
                )));
            }
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        if let Some(w) = triplets.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::invalid(format!(
                "weight ({}, {}) given twice",
                w[0].0, w[0].1
            )));
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(i, _, _) in &triplets {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = triplets.iter().map(|t| t.1).collect();
        let vals = triplets.iter().map(|t| t.2).collect();
        let mut w = WeightsMatrix {
            n,
            row_ptr,
            cols,
            vals,
            row_standardized: false,
            scheme,
        };
        w.row_standardized = w.rows_sum_to_one();
        Ok(w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn scheme(&self) -> &WeightScheme {
        &self.scheme
    }

    pub fn is_row_standardized(&self) -> bool {
        self.row_standardized
    }

    /// Nonzero entries of row `i` as `(column, weight)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(p) => self.vals[r.start + p],
            Err(_) => 0.0,
        }
    }

    /// All entries in (row, column) order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, w)| (i, j, w)))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, w)| w).sum()).collect()
    }

    /// Sites with no neighbours (all-zero rows).
    pub fn isolated_sites(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.degree(i) == 0).collect()
    }

    pub fn has_isolated(&self) -> bool {
        (0..self.n).any(|i| self.degree(i) == 0)
    }

    pub fn total_weight(&self) -> f64 {
        self.vals.iter().sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.triplets().all(|(i, j, w)| (self.get(j, i) - w).abs() <= tol * w.abs().max(1.0))
    }

    /// Spatial lag `W·y`.
    pub fn lag(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n, "vector length does not match W");
        (0..self.n)
            .map(|i| self.row(i).map(|(j, w)| w * y[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, w) in self.triplets() {
            m[(i, j)] = w;
        }
        m
    }

    fn rows_sum_to_one(&self) -> bool {
        self.nnz() > 0
            && (0..self.n)
                .filter(|&i| self.degree(i) > 0)
                .all(|i| (self.row(i).map(|(_, w)| w).sum::<f64>() - 1.0).abs() <= 1e-12)
    }
}

/// Binary symmetric contiguity matrix from an undirected edge list.
/// Repeated edges (in either direction) are merged.
pub fn build_contiguity(n: usize, edges: &[(usize, usize)]) -> Result<WeightsMatrix> {
    let mut pairs = Vec::with_capacity(edges.len() * 2);
    for &(i, j) in edges {
        if i == j {
            return Err(Error::invalid(format!("self-loop edge at site {i}")));
        }
        pairs.push((i, j));
        pairs.push((j, i));
    }
    pairs.sort_unstable();
    pairs.dedup();
    let w = WeightsMatrix::from_triplets(
        n,
        pairs.into_iter().map(|(i, j)| (i, j, 1.0)).collect(),
        WeightScheme::Contiguity,
    )?;
    warn_isolated(&w);
    Ok(w)
}

/// Binary k-nearest-neighbour matrix; distance ties go to the lower index.
pub fn build_knn(dist: &DistanceMatrix, k: usize) -> Result<WeightsMatrix> {
    let n = dist.len();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={}", n.saturating_sub(1))));
    }
    let mut triplets = Vec::with_capacity(n * k);
    let mut idx: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let d = dist.row(i);
        idx.clear();
        idx.extend((0..n).filter(|&j| j != i));
        idx.select_nth_unstable_by(k - 1, |&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
        triplets.extend(idx[..k].iter().map(|&j| (i, j, 1.0)));
    }
    WeightsMatrix::from_triplets(n, triplets, WeightScheme::Knn { k })
}

/// `w_ij = d_ij^(-power)`, dropped beyond `cutoff` when one is given.
pub fn build_inverse_distance(
    dist: &DistanceMatrix,
    power: f64,
    cutoff: Option<f64>,
) -> Result<WeightsMatrix> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::invalid(format!("power must be positive, got {power}")));
    }
    if let Some(&(i, j)) = dist.duplicate_pairs().first() {
        return Err(Error::invalid(format!(
            "sites {i} and {j} coincide; inverse-distance weight is undefined"
        )));
    }
    let n = dist.len();
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist.get(i, j);
            if cutoff.is_some_and(|c| d > c) {
                continue;
            }
            triplets.push((i, j, d.powf(-power)));
        }
    }
    let w = WeightsMatrix::from_triplets(n, triplets, WeightScheme::InverseDistance { power, cutoff })?;
    warn_isolated(&w);
    Ok(w)
}

/// Divides every nonzero row by its sum. Zero rows stay zero.
pub fn row_standardize(w: &WeightsMatrix) -> WeightsMatrix {
    if w.row_standardized {
        return w.clone();
    }
    let mut out = w.clone();
    for i in 0..w.n {
        let r = w.row_ptr[i]..w.row_ptr[i + 1];
        let s: f64 = w.vals[r.clone()].iter().sum();
        if s > 0.0 {
            for v in &mut out.vals[r] {
                *v /= s;
            }
        }
    }
    out.row_standardized = out.nnz() > 0;
    warn_isolated(&out);
    out
}

fn warn_isolated(w: &WeightsMatrix) {
    let iso = w.isolated_sites();
    if !iso.is_empty() {
        log::warn!("{} site(s) have no neighbours under {}", iso.len(), w.scheme);
    }
}

/// Global Moran's I: `(n / S0) · Σ w_ij z_i z_j / Σ z_i²` with `z = y − ȳ`.
pub fn morans_i(w: &WeightsMatrix, y: &[f64]) -> Result<f64> {
    let n = w.n();
    if y.len() != n {
        return Err(Error::invalid(format!("{} values for a {n}-site matrix", y.len())));
    }
    let s0 = w.total_weight();
    if s0 <= 0.0 {
        return Err(Error::invalid("weights matrix has no nonzero entry"));
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let z: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let ss: f64 = z.iter().map(|v| v * v).sum();
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    if ss <= (n as f64) * (scale * 1e-14).powi(2) {
        return Err(Error::invalid("outcome is constant; Moran's I is undefined"));
    }
    let cross: f64 = w.triplets().map(|(i, j, wij)| wij * z[i] * z[j]).sum();
    Ok(n as f64 / s0 * cross / ss)
}

/// Outcome of [`select_weights`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightsSelection {
    /// Index of the winning candidate.
    pub index: usize,
    pub morans_i: f64,
    /// Moran's I per candidate; `None` where it could not be computed.
    pub per_candidate: Vec<Option<f64>>,
}

/// Picks the candidate with the largest Moran's I (first one on ties).
pub fn select_weights(candidates: &[WeightsMatrix], y: &[f64]) -> Result<WeightsSelection> {
    if candidates.is_empty() {
        return Err(Error::invalid("no candidate weights matrices"));
    }
    let per_candidate: Vec<Option<f64>> = candidates
        .iter()
        .enumerate()
        .map(|(k, w)| match morans_i(w, y) {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("skipping weights candidate {k} ({}): {e}", w.scheme());
                None
            }
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in per_candidate.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((k, v));
            }
        }
    }
    let (index, morans_i) =
        best.ok_or_else(|| Error::invalid("Moran's I failed for every candidate matrix"))?;
    Ok(WeightsSelection {
        index,
        morans_i,
        per_candidate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{pairwise_distances, Layout, Site};

    fn line(n: usize) -> Layout {
        Layout::new((0..n).map(|i| Site::new(format!("{i}"), i as f64, 0.0)).collect()).unwrap()
    }

    #[test]
    fn contiguity_single_edge() {
        let w = build_contiguity(3, &[(1, 2)]).unwrap();
        assert_eq!(w.get(1, 2), 1.0);
        assert_eq!(w.get(2, 1), 1.0);
        assert_eq!(w.nnz(), 2);
        assert_eq!(w.isolated_sites(), vec![0]);
    }

    #[test]
    fn contiguity_empty_and_self_loop() {
        let w = build_contiguity(4, &[]).unwrap();
        assert_eq!(w.nnz(), 0);
        assert_eq!(w.isolated_sites().len(), 4);
        assert!(build_contiguity(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn knn_tie_goes_to_lower_index() {
        let d = pairwise_distances(&line(3));
        let w = build_knn(&d, 1).unwrap();
        assert_eq!(w.get(1, 0), 1.0);
        assert_eq!(w.get(1, 2), 0.0);
        assert_eq!(w.get(0, 1), 1.0);
        assert_eq!(w.get(2, 1), 1.0);
    }

    #[test]
    fn knn_full() {
        let d = pairwise_distances(&line(5));
        let w = build_knn(&d, 4).unwrap();
        assert_eq!(w.nnz(), 20);
        assert!(build_knn(&d, 5).is_err());
        assert!(build_knn(&d, 0).is_err());
    }

    #[test]
    fn inverse_distance_values() {
        let l = Layout::new(vec![Site::new("a", 0.0, 0.0), Site::new("b", 2.0, 0.0)]).unwrap();
        let w = build_inverse_distance(&pairwise_distances(&l), 1.0, None).unwrap();
        assert_eq!(w.get(0, 1), 0.5);
        let cut = build_inverse_distance(&pairwise_distances(&l), 1.0, Some(1.0)).unwrap();
        assert_eq!(cut.nnz(), 0);
        assert_eq!(cut.isolated_sites(), vec![0, 1]);
    }

    #[test]
    fn inverse_distance_rejects_coincident_sites() {
        let l = Layout::new(vec![Site::new("a", 0.0, 0.0), Site::new("b", 0.0, 0.0)]).unwrap();
        assert!(build_inverse_distance(&pairwise_distances(&l), 1.0, None).is_err());
    }

    #[test]
    fn standardize_four_neighbours() {
        let w = build_contiguity(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let s = row_standardize(&w);
        for j in 1..5 {
            assert_eq!(s.get(0, j), 0.25);
            assert_eq!(s.get(j, 0), 1.0);
        }
        assert!(s.is_row_standardized());
        assert_eq!(row_standardize(&s), s);
    }

    #[test]
    fn standardize_keeps_zero_rows() {
        let w = build_contiguity(3, &[(0, 1)]).unwrap();
        let s = row_standardize(&w);
        assert_eq!(s.isolated_sites(), vec![2]);
        assert_eq!(s.row_sums(), vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn morans_i_path_graph_is_zero() {
        let w = row_standardize(&build_contiguity(3, &[(0, 1), (1, 2)]).unwrap());
        let i = morans_i(&w, &[1.0, 2.0, 3.0]).unwrap();
        assert!(i.abs() < 1e-15, "{i}");
    }

    #[test]
    fn morans_i_errors() {
        let w = build_contiguity(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(morans_i(&w, &[2.0, 2.0, 2.0]).is_err());
        let empty = build_contiguity(3, &[]).unwrap();
        assert!(morans_i(&empty, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn selection_single_and_skips() {
        let w = build_contiguity(3, &[(0, 1), (1, 2)]).unwrap();
        let sel = select_weights(std::slice::from_ref(&w), &[1.0, 5.0, 2.0]).unwrap();
        assert_eq!(sel.index, 0);
        let empty = build_contiguity(3, &[]).unwrap();
        let sel = select_weights(&[empty.clone(), w], &[1.0, 5.0, 2.0]).unwrap();
        assert_eq!(sel.index, 1);
        assert_eq!(sel.per_candidate[0], None);
        assert!(select_weights(&[empty], &[1.0, 5.0, 2.0]).is_err());
        assert!(select_weights(&[], &[1.0]).is_err());
    }
}
