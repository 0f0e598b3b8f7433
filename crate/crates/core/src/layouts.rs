//! Bundled site layouts.
//!
//! `france94` holds the prefectures of the 94 mainland French départements
//! in projected kilometres, with neighbour pairs approximating département
//! contiguity (see `examples/generate_layout.rs`, which regenerates the
//! files). Rectangular lattices with rook adjacency are always available.

use crate::error::Result;
use crate::spatial::{CandidateCluster, Layout, Site};
use crate::weights::{build_contiguity, WeightsMatrix};

const FRANCE94_SITES: &str = include_str!("../data/france94_sites.csv");
const FRANCE94_EDGES: &str = include_str!("../data/france94_edges.csv");

/// Centre of the bundled simulated cluster (Cher, prefecture Bourges).
pub const FRANCE94_CLUSTER_CENTER: &str = "18";
/// Number of départements in the bundled simulated cluster.
pub const FRANCE94_CLUSTER_SIZE: usize = 8;

/// A layout together with its neighbour pairs.
#[derive(Debug, Clone)]
pub struct BundledLayout {
    pub layout: Layout,
    pub names: Vec<String>,
    pub edges: Vec<(usize, usize)>,
}

impl BundledLayout {
    /// Binary contiguity matrix over `edges`.
    pub fn contiguity(&self) -> WeightsMatrix {
        build_contiguity(self.layout.len(), &self.edges).expect("bundled edges are valid")
    }
}

/// The 94 mainland départements.
pub fn france94() -> BundledLayout {
    let mut rdr = csv::Reader::from_reader(FRANCE94_SITES.as_bytes());
    let mut sites = Vec::new();
    let mut names = Vec::new();
    for rec in rdr.records() {
        let rec = rec.expect("bundled site file is valid CSV");
        let x: f64 = rec[2].parse().expect("bundled x");
        let y: f64 = rec[3].parse().expect("bundled y");
        sites.push(Site::new(&rec[0], x, y));
        names.push(rec[1].to_string());
    }
    let layout = Layout::new(sites).expect("bundled layout is valid");
    let mut rdr = csv::Reader::from_reader(FRANCE94_EDGES.as_bytes());
    let edges = rdr
        .records()
        .map(|rec| {
            let rec = rec.expect("bundled edge file is valid CSV");
            let i = layout.index_of(&rec[0]).expect("edge endpoint is a site");
            let j = layout.index_of(&rec[1]).expect("edge endpoint is a site");
            (i, j)
        })
        .collect();
    BundledLayout { layout, names, edges }
}

/// The bundled simulated cluster: the centre département and its seven
/// nearest prefectures, which is itself a circular candidate window.
pub fn france94_true_cluster(layout: &Layout) -> CandidateCluster {
    nearest_window(layout, FRANCE94_CLUSTER_CENTER, FRANCE94_CLUSTER_SIZE)
        .expect("bundled cluster centre exists")
}

/// Circular window of `size` sites around the site with id `center`.
pub fn nearest_window(layout: &Layout, center: &str, size: usize) -> Result<CandidateCluster> {
    let c = layout
        .index_of(center)
        .ok_or_else(|| crate::error::Error::invalid(format!("unknown site id {center:?}")))?;
    if size == 0 || size > layout.len() {
        return Err(crate::error::Error::invalid(format!(
            "window size {size} is invalid for {} sites",
            layout.len()
        )));
    }
    let s = layout.sites();
    let d = |i: usize| (s[i].x - s[c].x).hypot(s[i].y - s[c].y);
    let mut order: Vec<usize> = (0..layout.len()).collect();
    order.sort_by(|&a, &b| d(a).total_cmp(&d(b)).then((a != c).cmp(&(b != c))).then(a.cmp(&b)));
    let radius = d(order[size - 1]);
    let mut members = order[..size].to_vec();
    members.sort_unstable();
    Ok(CandidateCluster {
        center: c,
        radius,
        members,
    })
}

/// `nx × ny` unit lattice; see [`Layout::lattice`].
pub fn lattice(nx: usize, ny: usize) -> BundledLayout {
    let layout = Layout::lattice(nx, ny).expect("lattice dimensions are positive");
    let names = layout.sites().iter().map(|s| s.id.clone()).collect();
    BundledLayout {
        layout,
        names,
        edges: rook_edges(nx, ny),
    }
}

/// Horizontal and vertical neighbour pairs of an `nx × ny` lattice indexed
/// `row * nx + col`.
pub fn rook_edges(nx: usize, ny: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(2 * nx * ny);
    for r in 0..ny {
        for c in 0..nx {
            let i = r * nx + c;
            if c + 1 < nx {
                edges.push((i, i + 1));
            }
            if r + 1 < ny {
                edges.push((i, i + nx));
            }
        }
    }
    edges
}
