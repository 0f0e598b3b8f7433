#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use sarscan::spatial::{CandidateCluster, Layout, Site};

pub fn random_layout(n: usize, rng: &mut impl Rng) -> Layout {
    Layout::new(
        (0..n)
            .map(|i| Site::new(format!("s{i}"), rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0))
            .collect(),
    )
    .unwrap()
}

pub fn normals(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// A random proper subset of `0..n` as a window.
pub fn random_cluster(n: usize, rng: &mut impl Rng) -> CandidateCluster {
    let size = rng.random_range(1..n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..size {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut members = idx[..size].to_vec();
    members.sort_unstable();
    CandidateCluster {
        center: members[0],
        radius: 0.0,
        members,
    }
}

pub fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (s, k) = v.into_iter().fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    s / k as f64
}

/// Group means and within-group sums of squares, computed directly.
pub fn two_group(y: &[f64], c: &CandidateCluster) -> (f64, f64, f64) {
    let inside: Vec<f64> = c.members.iter().map(|&i| y[i]).collect();
    let outside: Vec<f64> = (0..y.len()).filter(|i| !c.contains(*i)).map(|i| y[i]).collect();
    let mi = mean(inside.iter().copied());
    let mo = mean(outside.iter().copied());
    let within = inside.iter().map(|v| (v - mi).powi(2)).sum::<f64>()
        + outside.iter().map(|v| (v - mo).powi(2)).sum::<f64>();
    (mi, mo, within)
}
