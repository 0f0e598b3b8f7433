//! Regenerates the bundled French layout in `data/`.
//!
//! Sites are the prefectures of the 94 mainland départements (Corsica
//! excluded), projected to kilometres with an equirectangular projection
//! centred at 46.5°N, 2.5°E. Neighbour pairs are the Delaunay triangulation
//! of the prefectures with edges longer than `MAX_EDGE_KM` removed, which
//! drops hull edges running over the sea or along the land borders.
//!
//! ```text
//! cargo run --example generate_layout -- crates/core/data
//! ```

use std::error::Error;
use std::path::PathBuf;

const MAX_EDGE_KM: f64 = 200.0;

#[rustfmt::skip]
const PREFECTURES: &[(&str, &str, f64, f64)] = &[
    ("01", "Bourg-en-Bresse", 46.205, 5.225),
    ("02", "Laon", 49.564, 3.620),
    ("03", "Moulins", 46.566, 3.333),
    ("04", "Digne-les-Bains", 44.092, 6.236),
    ("05", "Gap", 44.559, 6.079),
    ("06", "Nice", 43.710, 7.262),
    ("07", "Privas", 44.735, 4.599),
    ("08", "Charleville-Mezieres", 49.762, 4.726),
    ("09", "Foix", 42.965, 1.607),
    ("10", "Troyes", 48.297, 4.074),
    ("11", "Carcassonne", 43.213, 2.349),
    ("12", "Rodez", 44.350, 2.575),
    ("13", "Marseille", 43.296, 5.370),
    ("14", "Caen", 49.182, -0.370),
    ("15", "Aurillac", 44.926, 2.440),
    ("16", "Angouleme", 45.648, 0.156),
    ("17", "La Rochelle", 46.160, -1.151),
    ("18", "Bourges", 47.081, 2.399),
    ("19", "Tulle", 45.267, 1.771),
    ("21", "Dijon", 47.322, 5.041),
    ("22", "Saint-Brieuc", 48.514, -2.765),
    ("23", "Gueret", 46.171, 1.872),
    ("24", "Perigueux", 45.184, 0.721),
    ("25", "Besancon", 47.238, 6.024),
    ("26", "Valence", 44.933, 4.892),
    ("27", "Evreux", 49.027, 1.151),
    ("28", "Chartres", 48.446, 1.489),
    ("29", "Quimper", 47.996, -4.102),
    ("30", "Nimes", 43.837, 4.360),
    ("31", "Toulouse", 43.605, 1.444),
    ("32", "Auch", 43.646, 0.586),
    ("33", "Bordeaux", 44.838, -0.579),
    ("34", "Montpellier", 43.611, 3.877),
    ("35", "Rennes", 48.117, -1.678),
    ("36", "Chateauroux", 46.811, 1.686),
    ("37", "Tours", 47.394, 0.685),
    ("38", "Grenoble", 45.188, 5.724),
    ("39", "Lons-le-Saunier", 46.675, 5.555),
    ("40", "Mont-de-Marsan", 43.890, -0.500),
    ("41", "Blois", 47.586, 1.336),
    ("42", "Saint-Etienne", 45.440, 4.387),
    ("43", "Le Puy-en-Velay", 45.043, 3.885),
    ("44", "Nantes", 47.218, -1.554),
    ("45", "Orleans", 47.903, 1.909),
    ("46", "Cahors", 44.448, 1.441),
    ("47", "Agen", 44.203, 0.616),
    ("48", "Mende", 44.518, 3.500),
    ("49", "Angers", 47.478, -0.563),
    ("50", "Saint-Lo", 49.116, -1.091),
    ("51", "Chalons-en-Champagne", 48.957, 4.365),
    ("52", "Chaumont", 48.111, 5.139),
    ("53", "Laval", 48.073, -0.770),
    ("54", "Nancy", 48.692, 6.184),
    ("55", "Bar-le-Duc", 48.773, 5.160),
    ("56", "Vannes", 47.658, -2.760),
    ("57", "Metz", 49.120, 6.176),
    ("58", "Nevers", 46.990, 3.159),
    ("59", "Lille", 50.629, 3.057),
    ("60", "Beauvais", 49.430, 2.081),
    ("61", "Alencon", 48.432, 0.091),
    ("62", "Arras", 50.291, 2.777),
    ("63", "Clermont-Ferrand", 45.778, 3.087),
    ("64", "Pau", 43.295, -0.371),
    ("65", "Tarbes", 43.233, 0.078),
    ("66", "Perpignan", 42.699, 2.895),
    ("67", "Strasbourg", 48.573, 7.752),
    ("68", "Colmar", 48.079, 7.358),
    ("69", "Lyon", 45.764, 4.836),
    ("70", "Vesoul", 47.620, 6.155),
    ("71", "Macon", 46.307, 4.828),
    ("72", "Le Mans", 48.006, 0.199),
    ("73", "Chambery", 45.564, 5.917),
    ("74", "Annecy", 45.899, 6.129),
    ("75", "Paris", 48.857, 2.352),
    ("76", "Rouen", 49.443, 1.099),
    ("77", "Melun", 48.540, 2.660),
    ("78", "Versailles", 48.801, 2.130),
    ("79", "Niort", 46.323, -0.459),
    ("80", "Amiens", 49.894, 2.296),
    ("81", "Albi", 43.929, 2.148),
    ("82", "Montauban", 44.018, 1.355),
    ("83", "Toulon", 43.124, 5.928),
    ("84", "Avignon", 43.949, 4.806),
    ("85", "La Roche-sur-Yon", 46.670, -1.426),
    ("86", "Poitiers", 46.580, 0.340),
    ("87", "Limoges", 45.833, 1.262),
    ("88", "Epinal", 48.173, 6.449),
    ("89", "Auxerre", 47.798, 3.567),
    ("90", "Belfort", 47.640, 6.863),
    ("91", "Evry", 48.629, 2.441),
    ("92", "Nanterre", 48.892, 2.207),
    ("93", "Bobigny", 48.909, 2.440),
    ("94", "Creteil", 48.790, 2.455),
    ("95", "Cergy", 49.036, 2.076),
];

fn project(lat: f64, lon: f64) -> (f64, f64) {
    let k = 46.5f64.to_radians().cos();
    let x = (lon - 2.5) * k * 111.32;
    let y = (lat - 46.5) * 110.57;
    ((x * 10.0).round() / 10.0, (y * 10.0).round() / 10.0)
}

/// Delaunay edges by the empty-circumcircle test over all triples.
fn delaunay(p: &[(f64, f64)]) -> Vec<(usize, usize)> {
    let n = p.len();
    let mut edges = std::collections::BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (ax, ay) = p[i];
                let (bx, by) = p[j];
                let (cx, cy) = p[k];
                let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
                if d.abs() < 1e-9 {
                    continue;
                }
                let a2 = ax * ax + ay * ay;
                let b2 = bx * bx + by * by;
                let c2 = cx * cx + cy * cy;
                let ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
                let uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
                let r2 = (ax - ux).powi(2) + (ay - uy).powi(2);
                let empty = (0..n)
                    .filter(|&m| m != i && m != j && m != k)
                    .all(|m| (p[m].0 - ux).powi(2) + (p[m].1 - uy).powi(2) > r2 * (1.0 + 1e-12));
                if empty {
                    edges.insert((i, j));
                    edges.insert((i, k));
                    edges.insert((j, k));
                }
            }
        }
    }
    edges.into_iter().collect()
}

fn main() -> Result<(), Box<dyn Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/data".into()));
    let pts: Vec<(f64, f64)> = PREFECTURES.iter().map(|&(_, _, lat, lon)| project(lat, lon)).collect();
    let dist = |i: usize, j: usize| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
    let edges: Vec<(usize, usize)> = delaunay(&pts)
        .into_iter()
        .filter(|&(i, j)| dist(i, j) <= MAX_EDGE_KM)
        .collect();

    let mut sites = csv::Writer::from_path(dir.join("france94_sites.csv"))?;
    sites.write_record(["id", "name", "x", "y"])?;
    for (&(id, name, _, _), &(x, y)) in PREFECTURES.iter().zip(&pts) {
        sites.write_record([id, name, &format!("{x:.1}"), &format!("{y:.1}")])?;
    }
    sites.flush()?;

    let mut out = csv::Writer::from_path(dir.join("france94_edges.csv"))?;
    out.write_record(["id_i", "id_j"])?;
    for &(i, j) in &edges {
        out.write_record([PREFECTURES[i].0, PREFECTURES[j].0])?;
    }
    out.flush()?;

    let mut degree = vec![0usize; pts.len()];
    for &(i, j) in &edges {
        degree[i] += 1;
        degree[j] += 1;
    }
    let mean = degree.iter().sum::<usize>() as f64 / pts.len() as f64;
    println!(
        "{} sites, {} edges, degree min {} mean {:.2} max {}",
        pts.len(),
        edges.len(),
        degree.iter().min().unwrap(),
        mean,
        degree.iter().max().unwrap()
    );
    Ok(())
}
