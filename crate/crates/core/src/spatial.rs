//! Site geometry, datasets, and the family of circular scanning windows.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::site_key;

/// One location in a planar coordinate system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

impl Site {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Self {
        Site { id: id.into(), x, y }
    }
}

/// Validated set of sites: unique ids, finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    sites: Vec<Site>,
}

impl Layout {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::invalid("layout has no sites"));
        }
        let mut seen = HashSet::with_capacity(sites.len());
        for (i, s) in sites.iter().enumerate() {
            if !(s.x.is_finite() && s.y.is_finite()) {
                return Err(Error::invalid(format!(
                    "site {} ({}) has non-finite coordinates",
                    i, s.id
                )));
            }
            if !seen.insert(s.id.as_str()) {
                return Err(Error::invalid(format!("duplicate site id '{}'", s.id)));
            }
        }
        Ok(Layout { sites })
    }

    /// Regular `nx × ny` grid with unit spacing. Site `(col, row)` has index
    /// `row * nx + col` and id `r{row}c{col}`.
    pub fn lattice(nx: usize, ny: usize) -> Result<Self> {
        let sites = (0..ny)
            .flat_map(|r| (0..nx).map(move |c| (r, c)))
            .map(|(r, c)| Site::new(format!("r{r}c{c}"), c as f64, r as f64))
            .collect();
        Layout::new(sites)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.id == id)
    }

    /// Map from site id to index.
    pub fn id_index(&self) -> HashMap<&str, usize> {
        self.sites
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect()
    }
}

/// A layout plus one continuous outcome per site.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDataset {
    layout: Layout,
    values: Vec<f64>,
}

impl SpatialDataset {
    pub fn new(layout: Layout, values: Vec<f64>) -> Result<Self> {
        if layout.len() < 3 {
            return Err(Error::invalid(format!(
                "a dataset needs at least 3 sites, got {}",
                layout.len()
            )));
        }
        if values.len() != layout.len() {
            return Err(Error::invalid(format!(
                "{} values for {} sites",
                values.len(),
                layout.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "value of site {} is not finite",
                layout.sites()[i].id
            )));
        }
        Ok(SpatialDataset { layout, values })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        SpatialDataset::new(self.layout.clone(), values)
    }
}

/// Dense symmetric matrix of Euclidean distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
    duplicates: Vec<(usize, usize)>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Pairs `i < j` sharing identical coordinates.
    pub fn duplicate_pairs(&self) -> &[(usize, usize)] {
        &self.duplicates
    }
}

pub fn pairwise_distances(layout: &Layout) -> DistanceMatrix {
    let n = layout.len();
    let s = layout.sites();
    let mut data = vec![0.0; n * n];
    let mut duplicates = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (s[i].x - s[j].x).hypot(s[i].y - s[j].y);
            data[i * n + j] = d;
            data[j * n + i] = d;
            if d == 0.0 {
                duplicates.push((i, j));
            }
        }
    }
    if !duplicates.is_empty() {
        log::warn!(
            "{} pair(s) of sites share coordinates (first: {} and {})",
            duplicates.len(),
            s[duplicates[0].0].id,
            s[duplicates[0].1].id
        );
    }
    DistanceMatrix {
        n,
        data,
        duplicates,
    }
}

/// A circular scanning window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCluster {
    pub center: usize,
    pub radius: f64,
    /// Sorted site indices.
    pub members: Vec<usize>,
}

impl CandidateCluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.members.binary_search(&site).is_ok()
    }

    /// 0/1 membership vector of length `n`.
    pub fn indicator(&self, n: usize) -> Vec<bool> {
        let mut v = vec![false; n];
        for &m in &self.members {
            v[m] = true;
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Entry {
    pub row: u32,
    pub center: u32,
    pub size: u32,
}

/// Compact storage of a family of windows.
///
/// Sites are kept per row in window-growth order, so every candidate is a
/// prefix of its row. Scanning a value vector then costs one running sum per
/// row instead of one pass per candidate.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    n: usize,
    row_start: Vec<usize>,
    order: Vec<u32>,
    dist: Vec<f64>,
    entries: Vec<Entry>,
    row_entries: Vec<usize>,
}

fn max_size(n: usize, max_fraction: f64) -> Result<usize> {
    if !(max_fraction > 0.0 && max_fraction <= 0.5) {
        return Err(Error::invalid(format!(
            "max_fraction must lie in (0, 0.5], got {max_fraction}"
        )));
    }
    Ok((n as f64 * max_fraction + 1e-9).floor() as usize)
}

impl CandidateSet {
    /// Circular windows centred on each site, grown in increasing distance.
    /// Sites at equal distance enter together; duplicate member sets are kept
    /// once (first occurrence by center, then size).
    pub fn circular(layout: &Layout, max_fraction: f64) -> Result<Self> {
        let n = layout.len();
        let cap = max_size(n, max_fraction)?;
        let dist = pairwise_distances(layout);

        let mut set = CandidateSet {
            n,
            row_start: Vec::with_capacity(n + 1),
            order: Vec::with_capacity(n * cap),
            dist: Vec::with_capacity(n * cap),
            entries: Vec::new(),
            row_entries: Vec::with_capacity(n + 1),
        };
        let mut seen: HashMap<(u64, u64, u32), Vec<usize>> = HashMap::new();
        let mut idx: Vec<usize> = (0..n).collect();

        for c in 0..n {
            set.row_start.push(set.order.len());
            set.row_entries.push(set.entries.len());
            if cap == 0 {
                continue;
            }
            let d = dist.row(c);
            idx.sort_by(|&a, &b| {
                d[a].total_cmp(&d[b])
                    .then((a != c).cmp(&(b != c)))
                    .then(a.cmp(&b))
            });
            let base = set.order.len();
            for &j in idx.iter().take(cap) {
                set.order.push(j as u32);
                set.dist.push(d[j]);
            }

            let (mut h1, mut h2) = (0u64, 0u64);
            for pos in 0..cap {
                let j = idx[pos];
                h1 = h1.wrapping_add(site_key(1, j));
                h2 = h2.wrapping_add(site_key(2, j));
                let size = pos + 1;
                // a window ends where the next site is strictly farther away
                let closes = size == n || d[idx[size]] > d[j];
                if !closes {
                    continue;
                }
                let key = (h1, h2, size as u32);
                let members = &set.order[base..base + size];
                let dup = seen.get(&key).is_some_and(|prev| {
                    prev.iter().any(|&e| same_members(&set, e, members))
                });
                if dup {
                    continue;
                }
                seen.entry(key).or_default().push(set.entries.len());
                set.entries.push(Entry {
                    row: c as u32,
                    center: c as u32,
                    size: size as u32,
                });
            }
        }
        set.row_start.push(set.order.len());
        set.row_entries.push(set.entries.len());
        Ok(set)
    }

    /// Wraps an explicit list of windows. Each becomes its own row.
    pub fn from_clusters(n: usize, clusters: &[CandidateCluster]) -> Result<Self> {
        let mut set = CandidateSet {
            n,
            row_start: Vec::new(),
            order: Vec::new(),
            dist: Vec::new(),
            entries: Vec::new(),
            row_entries: Vec::new(),
        };
        for (r, cl) in clusters.iter().enumerate() {
            if cl.members.is_empty() || cl.members.len() >= n {
                return Err(Error::invalid(format!(
                    "candidate {r} has {} members; need 1 ≤ size < {n}",
                    cl.members.len()
                )));
            }
            if cl.members.iter().any(|&m| m >= n) {
                return Err(Error::invalid(format!("candidate {r} references a site ≥ {n}")));
            }
            set.row_start.push(set.order.len());
            set.row_entries.push(set.entries.len());
            set.order.extend(cl.members.iter().map(|&m| m as u32));
            set.dist.extend(std::iter::repeat_n(cl.radius, cl.members.len()));
            set.entries.push(Entry {
                row: r as u32,
                center: cl.center as u32,
                size: cl.members.len() as u32,
            });
        }
        set.row_start.push(set.order.len());
        set.row_entries.push(set.entries.len());
        Ok(set)
    }

    /// Number of sites the windows are defined over.
    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// Number of candidate windows.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn n_rows(&self) -> usize {
        self.row_start.len() - 1
    }

    pub(crate) fn row(&self, r: usize) -> &[u32] {
        &self.order[self.row_start[r]..self.row_start[r + 1]]
    }

    pub(crate) fn row_entry_range(&self, r: usize) -> std::ops::Range<usize> {
        self.row_entries[r]..self.row_entries[r + 1]
    }

    pub(crate) fn entry(&self, k: usize) -> Entry {
        self.entries[k]
    }

    pub(crate) fn members_of(&self, k: usize) -> &[u32] {
        let e = self.entries[k];
        let start = self.row_start[e.row as usize];
        &self.order[start..start + e.size as usize]
    }

    pub fn size_of(&self, k: usize) -> usize {
        self.entries[k].size as usize
    }

    pub fn cluster(&self, k: usize) -> CandidateCluster {
        let e = self.entries[k];
        let start = self.row_start[e.row as usize];
        let mut members: Vec<usize> = self.members_of(k).iter().map(|&m| m as usize).collect();
        members.sort_unstable();
        CandidateCluster {
            center: e.center as usize,
            radius: self.dist[start + e.size as usize - 1],
            members,
        }
    }

    pub fn clusters(&self) -> Vec<CandidateCluster> {
        (0..self.len()).map(|k| self.cluster(k)).collect()
    }

    /// Per-candidate flag: does the window share a site with `sites`?
    pub fn intersecting(&self, sites: &[bool]) -> Vec<bool> {
        let mut out = vec![false; self.len()];
        for r in 0..self.n_rows() {
            let row = self.row(r);
            let first_hit = row
                .iter()
                .position(|&s| sites[s as usize])
                .unwrap_or(row.len());
            for k in self.row_entry_range(r) {
                out[k] = self.entries[k].size as usize > first_hit;
            }
        }
        out
    }
}

fn same_members(set: &CandidateSet, k: usize, members: &[u32]) -> bool {
    let mut a = set.members_of(k).to_vec();
    let mut b = members.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

/// All distinct circular windows holding at most `floor(n · max_fraction)` sites,
/// ordered by center index, then size.
pub fn enumerate_candidates(layout: &Layout, max_fraction: f64) -> Result<Vec<CandidateCluster>> {
    Ok(CandidateSet::circular(layout, max_fraction)?.clusters())
}
