//! File formats.
//!
//! | file | columns |
//! |------|---------|
//! | dataset | `id,x,y,value` (value column name configurable) |
//! | dataset (GeoJSON) | `FeatureCollection` of `Point` features with a numeric value property |
//! | weights | `i,j,w` with 0-based indices, or `id_i,id_j,w` with site ids |
//! | neighbour pairs | `id_i,id_j`, or `i,j` with 0-based indices |
//! | report | JSON, plus a CSV `cluster,n_sites,mean_inside,sd_inside,mean_outside,sd_outside,p_value` |
//! | simulation config | `key = value` lines, `#` comments |

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::layouts;
use crate::scan::{ClusterReport, ScanMethod};
use crate::sim::{Arm, SimConfig, WeightsMode};
use crate::spatial::{Layout, Site, SpatialDataset};
use crate::weights::{build_contiguity, row_standardize, WeightScheme, WeightsMatrix};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Data rows of a headed CSV, with 1-based file line numbers.
fn csv_rows(path: &Path, text: &str) -> Result<(Vec<String>, Vec<(u64, Vec<String>)>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != header.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok((header, rows))
}

fn column(path: &Path, header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| parse_err(path, 1, format!("missing column {name:?}")))
}

fn parse_f64(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(path, line, format!("{what} {field:?} is not a finite number"))),
    }
}

fn parse_usize(path: &Path, line: u64, field: &str, what: &str) -> Result<usize> {
    field
        .parse::<usize>()
        .map_err(|_| parse_err(path, line, format!("{what} {field:?} is not a nonnegative integer")))
}

/// Reads an `id,x,y,<value_column>` CSV.
pub fn read_dataset_csv(path: &Path, value_column: &str) -> Result<SpatialDataset> {
    let text = read_text(path)?;
    let (header, rows) = csv_rows(path, &text)?;
    let ci = column(path, &header, "id")?;
    let cx = column(path, &header, "x")?;
    let cy = column(path, &header, "y")?;
    let cv = column(path, &header, value_column)?;
    let mut sites = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    let mut seen = std::collections::HashSet::new();
    for (line, r) in &rows {
        if !seen.insert(r[ci].clone()) {
            return Err(parse_err(path, *line, format!("duplicate site id {:?}", r[ci])));
        }
        let x = parse_f64(path, *line, &r[cx], "x")?;
        let y = parse_f64(path, *line, &r[cy], "y")?;
        values.push(parse_f64(path, *line, &r[cv], value_column)?);
        sites.push(Site::new(r[ci].clone(), x, y));
    }
    SpatialDataset::new(Layout::new(sites)?, values)
}

/// Reads point features from a GeoJSON `FeatureCollection`. Site ids come
/// from the `id` property, then the feature `id`, then the feature index.
pub fn read_geojson(path: &Path, value_property: &str) -> Result<SpatialDataset> {
    let text = read_text(path)?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| parse_err(path, e.line() as u64, e.to_string()))?;
    let features = doc
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or_else(|| Error::invalid(format!("{}: not a FeatureCollection", path.display())))?;
    let mut sites = Vec::with_capacity(features.len());
    let mut values = Vec::with_capacity(features.len());
    for (k, f) in features.iter().enumerate() {
        let bad = |msg: &str| Error::invalid(format!("{}: feature {k}: {msg}", path.display()));
        let geom = f.get("geometry").ok_or_else(|| bad("no geometry"))?;
        if geom.get("type").and_then(|t| t.as_str()) != Some("Point") {
            return Err(bad("geometry is not a Point"));
        }
        let coords = geom
            .get("coordinates")
            .and_then(|c| c.as_array())
            .filter(|c| c.len() >= 2)
            .ok_or_else(|| bad("missing coordinates"))?;
        let x = coords[0].as_f64().ok_or_else(|| bad("non-numeric x"))?;
        let y = coords[1].as_f64().ok_or_else(|| bad("non-numeric y"))?;
        let props = f.get("properties");
        let value = props
            .and_then(|p| p.get(value_property))
            .and_then(|v| v.as_f64())
            .ok_or_else(|| bad(&format!("missing numeric property {value_property:?}")))?;
        let id_of = |v: &serde_json::Value| match v {
            serde_json::Value::String(s) => Some(s.clone()),
            serde_json::Value::Number(n) => Some(n.to_string()),
            _ => None,
        };
        let id = props
            .and_then(|p| p.get("id"))
            .and_then(id_of)
            .or_else(|| f.get("id").and_then(id_of))
            .unwrap_or_else(|| k.to_string());
        sites.push(Site::new(id, x, y));
        values.push(value);
    }
    SpatialDataset::new(Layout::new(sites)?, values)
}

/// Reads a dataset, choosing the format from the file extension.
pub fn read_dataset(path: &Path, value_column: &str) -> Result<SpatialDataset> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("geojson") => read_geojson(path, value_column),
        _ => read_dataset_csv(path, value_column),
    }
}

fn site_index(path: &Path, line: u64, layout: &Layout, id: &str) -> Result<usize> {
    layout
        .index_of(id)
        .ok_or_else(|| parse_err(path, line, format!("unknown site id {id:?}")))
}

fn index_in_range(path: &Path, line: u64, field: &str, n: usize) -> Result<usize> {
    let i = parse_usize(path, line, field, "index")?;
    if i >= n {
        return Err(parse_err(path, line, format!("index {i} out of range for {n} sites")));
    }
    Ok(i)
}

/// Reads an edge-list weights file. The header selects the convention:
/// `i,j,w` for 0-based indices or `id_i,id_j,w` for site ids.
pub fn read_weights_csv(path: &Path, layout: &Layout) -> Result<WeightsMatrix> {
    let text = read_text(path)?;
    let (header, rows) = csv_rows(path, &text)?;
    let n = layout.len();
    let by_id = header.iter().any(|h| h == "id_i");
    let (a, b) = if by_id {
        (column(path, &header, "id_i")?, column(path, &header, "id_j")?)
    } else {
        (column(path, &header, "i")?, column(path, &header, "j")?)
    };
    let cw = column(path, &header, "w")?;
    let mut triplets = Vec::with_capacity(rows.len());
    for (line, r) in &rows {
        let (i, j) = if by_id {
            (site_index(path, *line, layout, &r[a])?, site_index(path, *line, layout, &r[b])?)
        } else {
            (index_in_range(path, *line, &r[a], n)?, index_in_range(path, *line, &r[b], n)?)
        };
        let w = parse_f64(path, *line, &r[cw], "weight")?;
        triplets.push((i, j, w));
    }
    WeightsMatrix::from_triplets(n, triplets, WeightScheme::Custom)
}

/// Reads neighbour pairs: `id_i,id_j` (site ids) or `i,j` (0-based indices).
pub fn read_contiguity_csv(path: &Path, layout: &Layout) -> Result<Vec<(usize, usize)>> {
    let text = read_text(path)?;
    let (header, rows) = csv_rows(path, &text)?;
    let n = layout.len();
    let by_id = header.iter().any(|h| h == "id_i");
    let (a, b) = if by_id {
        (column(path, &header, "id_i")?, column(path, &header, "id_j")?)
    } else {
        (column(path, &header, "i")?, column(path, &header, "j")?)
    };
    rows.iter()
        .map(|(line, r)| {
            if by_id {
                Ok((site_index(path, *line, layout, &r[a])?, site_index(path, *line, layout, &r[b])?))
            } else {
                Ok((index_in_range(path, *line, &r[a], n)?, index_in_range(path, *line, &r[b], n)?))
            }
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `i,j,w` rows in row-major order.
pub fn weights_csv(w: &WeightsMatrix) -> String {
    let mut s = String::from("i,j,w\n");
    for (i, j, v) in w.triplets() {
        s.push_str(&format!("{i},{j},{v}\n"));
    }
    s
}

pub fn write_weights_csv(path: &Path, w: &WeightsMatrix) -> Result<()> {
    write_text(path, &weights_csv(w))
}

/// Table of detected clusters, one row per cluster.
pub fn report_csv(clusters: &[ClusterReport]) -> String {
    let mut s = String::from("cluster,n_sites,mean_inside,sd_inside,mean_outside,sd_outside,p_value\n");
    for c in clusters {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.rank,
            c.cluster.size(),
            c.mean_inside,
            c.sd_inside,
            c.mean_outside,
            c.sd_outside,
            c.p_value
        ));
    }
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    write_text(path, text)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Record of one command-line run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub method: Option<String>,
    pub weights: Option<String>,
    pub mc_replicates: Option<usize>,
    pub alpha_level: Option<f64>,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_seconds: f64,
    pub rho_hat: Option<f64>,
    pub delta_bic: Option<f64>,
    pub selected_k: Option<usize>,
    pub selected_morans_i: Option<f64>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        RunManifest {
            command: command.to_string(),
            args,
            inputs: Vec::new(),
            method: None,
            weights: None,
            mc_replicates: None,
            alpha_level: None,
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: 0.0,
            rho_hat: None,
            delta_bic: None,
            selected_k: None,
            selected_morans_i: None,
            outputs: Vec::new(),
        }
    }
}

/// A simulation run described by a configuration file.
#[derive(Debug, Clone)]
pub struct SimSpec {
    pub config: SimConfig,
    pub arms: Vec<Arm>,
}

fn parse_list<T: std::str::FromStr>(path: &Path, line: u64, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| parse_err(path, line, format!("{key}: cannot parse {s:?}"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(path: &Path, line: u64, key: &str, v: &str) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| parse_err(path, line, format!("{key}: cannot parse {v:?}")))
}

/// Parses a `key = value` simulation configuration.
///
/// Keys: `layout` (`france94` or `lattice NXxNY`), `cluster_center`,
/// `cluster_size`, `rho_grid`, `c_grid`, `replicates`, `mc_replicates`,
/// `alpha_level`, `alpha0`, `sigma`, `seed`, `max_fraction`, `max_clusters`,
/// `knn_min`, `knn_max`, `scale` (`desk` or `paper`), `methods`
/// (comma-separated), `weights` (`true`, `knn-select` or `both`).
/// Unset keys keep the desk defaults on the French layout.
pub fn parse_sim_config(path: &Path, text: &str) -> Result<SimSpec> {
    let mut kv: Vec<(u64, String, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k as u64 + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| parse_err(path, line, "expected `key = value`"))?;
        kv.push((line, key.trim().to_string(), value.trim().to_string()));
    }
    let get = |key: &str| kv.iter().rev().find(|(_, k, _)| k == key);

    let bundled = match get("layout") {
        None => layouts::france94(),
        Some((_, _, v)) if v == "france94" => layouts::france94(),
        Some((line, _, v)) => {
            let dims = v
                .strip_prefix("lattice")
                .map(str::trim)
                .and_then(|d| d.split_once('x'))
                .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
                .filter(|&(a, b)| a > 0 && b > 0)
                .ok_or_else(|| parse_err(path, *line, format!("layout: expected `france94` or `lattice NXxNY`, got {v:?}")))?;
            layouts::lattice(dims.0, dims.1)
        }
    };
    let w = row_standardize(&build_contiguity(bundled.layout.len(), &bundled.edges)?);
    let default_center = if get("layout").is_none_or(|(_, _, v)| v == "france94") {
        layouts::FRANCE94_CLUSTER_CENTER.to_string()
    } else {
        bundled.layout.sites()[0].id.clone()
    };
    let center = get("cluster_center").map_or(default_center, |(_, _, v)| v.clone());
    let size = match get("cluster_size") {
        Some((l, k, v)) => parse_one::<usize>(path, *l, k, v)?,
        None => layouts::FRANCE94_CLUSTER_SIZE.min(bundled.layout.len() / 2).max(1),
    };
    let truth = layouts::nearest_window(&bundled.layout, &center, size)?;
    let mut cfg = SimConfig::desk(bundled.layout, w, truth);
    if let Some((_, _, v)) = get("scale") {
        match v.as_str() {
            "desk" => {}
            "paper" => cfg = cfg.paper_scale(),
            _ => return Err(Error::invalid(format!("scale must be `desk` or `paper`, got {v:?}"))),
        }
    }
    let mut arms_methods = vec![ScanMethod::Gaussian, ScanMethod::PSar, ScanMethod::NpSar];
    let mut modes = vec![WeightsMode::True];
    let known = [
        "layout", "cluster_center", "cluster_size", "scale", "rho_grid", "c_grid", "replicates",
        "mc_replicates", "alpha_level", "alpha0", "sigma", "seed", "max_fraction", "max_clusters",
        "knn_min", "knn_max", "methods", "weights",
    ];
    for (line, key, v) in &kv {
        let l = *line;
        match key.as_str() {
            "rho_grid" => cfg.rho_grid = parse_list(path, l, key, v)?,
            "c_grid" => cfg.c_grid = parse_list(path, l, key, v)?,
            "replicates" => cfg.replicates = parse_one(path, l, key, v)?,
            "mc_replicates" => cfg.mc_replicates = parse_one(path, l, key, v)?,
            "alpha_level" => cfg.alpha_level = parse_one(path, l, key, v)?,
            "alpha0" => cfg.alpha0 = parse_one(path, l, key, v)?,
            "sigma" => cfg.sigma = parse_one(path, l, key, v)?,
            "seed" => cfg.seed = parse_one(path, l, key, v)?,
            "max_fraction" => cfg.max_fraction = parse_one(path, l, key, v)?,
            "max_clusters" => cfg.max_clusters = parse_one(path, l, key, v)?,
            "knn_min" => cfg.knn_range.0 = parse_one(path, l, key, v)?,
            "knn_max" => cfg.knn_range.1 = parse_one(path, l, key, v)?,
            "methods" => arms_methods = parse_list(path, l, key, v)?,
            "weights" => {
                modes = match v.as_str() {
                    "true" => vec![WeightsMode::True],
                    "knn-select" => vec![WeightsMode::KnnSelect],
                    "both" => vec![WeightsMode::True, WeightsMode::KnnSelect],
                    _ => return Err(parse_err(path, l, format!("weights: expected true, knn-select or both, got {v:?}"))),
                }
            }
            k if known.contains(&k) => {}
            k => return Err(parse_err(path, l, format!("unknown key {k:?}"))),
        }
    }
    if cfg.sigma == 0.0 {
        return Err(Error::invalid("σ = 0 is only meaningful for algebraic checks, not for simulation runs"));
    }
    let mut arms = Vec::new();
    for m in &arms_methods {
        if m.uses_sar() {
            arms.extend(modes.iter().map(|&mode| Arm::new(*m, mode)));
        } else {
            arms.push(Arm::new(*m, WeightsMode::True));
        }
    }
    cfg.validate()?;
    Ok(SimSpec { config: cfg, arms })
}

pub fn read_sim_config(path: &Path) -> Result<SimSpec> {
    parse_sim_config(path, &read_text(path)?)
}
