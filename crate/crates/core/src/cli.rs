//! Command-line front end: `scan`, `simulate`, `weights`, `moran`.
//!
//! Exit codes: 0 success, 2 bad input or usage, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{self, RunManifest};
use crate::sar::RhoSelection;
use crate::scan::{detect, ClusterReport, DetectConfig, ScanMethod, ScanOptions, Transform};
use crate::sim::run_arms;
use crate::spatial::{pairwise_distances, SpatialDataset};
use crate::weights::{
    build_contiguity, build_inverse_distance, build_knn, morans_i, row_standardize, select_weights,
    WeightsMatrix,
};

#[derive(Debug, Parser)]
#[command(name = "sarscan", version, about = "Spatial scan statistics for continuous data under spatial autocorrelation")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect clusters in a dataset.
    Scan(ScanArgs),
    /// Run a simulation grid from a configuration file.
    Simulate(SimulateArgs),
    /// Build a weights matrix and report Moran's I.
    Weights(WeightsCmdArgs),
    /// Moran's I of a dataset.
    Moran(MoranArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Dataset: CSV with `id,x,y,value` or GeoJSON points.
    #[arg(long)]
    data: PathBuf,
    /// Column (CSV) or property (GeoJSON) holding the outcome.
    #[arg(long, default_value = "value")]
    value_column: String,
    /// Analyse ln(value); reports stay on the original scale.
    #[arg(long)]
    log: bool,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct WeightsArgs {
    /// Edge-list weights file (`i,j,w` or `id_i,id_j,w`).
    #[arg(long)]
    weights: Option<PathBuf>,
    /// k nearest neighbours.
    #[arg(long)]
    knn: Option<usize>,
    /// Row-standardized k-NN matrix with the largest Moran's I, k in K0..K1.
    #[arg(long, value_name = "K0..K1")]
    knn_select: Option<String>,
    /// Neighbour pairs file (`id_i,id_j` or `i,j`).
    #[arg(long)]
    contiguity: Option<PathBuf>,
    /// Inverse-distance weights with this power.
    #[arg(long, value_name = "POWER")]
    inverse_distance: Option<f64>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "gaussian")]
    method: ScanMethod,
    #[command(flatten)]
    w: WeightsArgs,
    /// Use the weights as given instead of row-standardizing them.
    #[arg(long)]
    no_standardize: bool,
    /// Monte Carlo permutations.
    #[arg(long, default_value_t = 999)]
    mc: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 10)]
    max_clusters: usize,
    /// Largest window as a fraction of the sites.
    #[arg(long, default_value_t = 0.5)]
    max_fraction: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct WeightsCmdArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    w: WeightsArgs,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MoranArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Defaults to `--knn 3`.
    #[command(flatten)]
    w: WeightsArgs,
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    out: PathBuf,
}

/// The weights matrix used by a run and how it was chosen.
#[derive(Debug, Clone, Serialize)]
struct WeightsInfo {
    description: String,
    standardized: bool,
    selected_k: Option<usize>,
    morans_i: Option<f64>,
    /// `(label, Moran's I)` per candidate matrix.
    candidates: Vec<(String, Option<f64>)>,
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::invalid(format!("expected a range like 2..10, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn is_set(w: &WeightsArgs) -> bool {
    w.weights.is_some() || w.knn.is_some() || w.knn_select.is_some() || w.contiguity.is_some() || w.inverse_distance.is_some()
}

fn build_weights(
    w: &WeightsArgs,
    ds: &SpatialDataset,
    analysis: &[f64],
    standardize: bool,
    default_knn: Option<usize>,
) -> Result<(WeightsMatrix, WeightsInfo)> {
    let layout = ds.layout();
    let finish = |m: WeightsMatrix, description: String| -> (WeightsMatrix, WeightsInfo) {
        let m = if standardize { row_standardize(&m) } else { m };
        let info = WeightsInfo {
            description,
            standardized: m.is_row_standardized(),
            selected_k: None,
            morans_i: morans_i(&m, analysis).ok(),
            candidates: Vec::new(),
        };
        (m, info)
    };
    if let Some(p) = &w.weights {
        let m = io::read_weights_csv(p, layout)?;
        return Ok(finish(m, format!("file {}", p.display())));
    }
    if let Some(p) = &w.contiguity {
        let edges = io::read_contiguity_csv(p, layout)?;
        return Ok(finish(build_contiguity(layout.len(), &edges)?, format!("contiguity {}", p.display())));
    }
    if let Some(k) = w.knn.or(if is_set(w) { None } else { default_knn }) {
        return Ok(finish(build_knn(&pairwise_distances(layout), k)?, format!("knn k={k}")));
    }
    if let Some(p) = w.inverse_distance {
        return Ok(finish(
            build_inverse_distance(&pairwise_distances(layout), p, None)?,
            format!("inverse-distance power={p}"),
        ));
    }
    if let Some(r) = &w.knn_select {
        let (k0, k1) = parse_range(r)?;
        let dist = pairwise_distances(layout);
        let family: Vec<WeightsMatrix> = (k0..=k1)
            .map(|k| build_knn(&dist, k).map(|m| row_standardize(&m)))
            .collect::<Result<_>>()?;
        let sel = select_weights(&family, analysis)?;
        let k = k0 + sel.index;
        let info = WeightsInfo {
            description: format!("knn-select k={k0}..{k1}"),
            standardized: true,
            selected_k: Some(k),
            morans_i: Some(sel.morans_i),
            candidates: (k0..=k1).map(|k| format!("knn k={k}")).zip(sel.per_candidate).collect(),
        };
        return Ok((family.into_iter().nth(sel.index).expect("selected index exists"), info));
    }
    Err(Error::invalid(
        "a weights matrix is required: --weights, --knn, --knn-select, --contiguity or --inverse-distance",
    ))
}

fn load(data: &DataArgs) -> Result<(SpatialDataset, Transform, Vec<f64>)> {
    let ds = io::read_dataset(&data.data, &data.value_column)?;
    let t = if data.log { Transform::Log } else { Transform::Identity };
    let analysis = t.apply(ds.values())?;
    Ok((ds, t, analysis))
}

#[derive(Debug, Serialize)]
struct ClusterOut<'a> {
    #[serde(flatten)]
    report: &'a ClusterReport,
    site_ids: Vec<&'a str>,
}

#[derive(Debug, Serialize)]
struct ScanReport<'a> {
    method: ScanMethod,
    n_sites: usize,
    transform: Transform,
    mc_replicates: usize,
    alpha_level: f64,
    seed: u64,
    weights: Option<&'a WeightsInfo>,
    rho: Option<&'a RhoSelection>,
    most_likely: ClusterOut<'a>,
    clusters: Vec<ClusterOut<'a>>,
}

fn finish_manifest(mut m: RunManifest, out: &Path, start: Instant) -> Result<()> {
    m.duration_seconds = start.elapsed().as_secs_f64();
    let path = out.join("manifest.json");
    m.outputs.push(path.clone());
    io::write_json(&path, &m)
}

fn cmd_scan(a: &ScanArgs, argv: &[String]) -> Result<()> {
    let start = Instant::now();
    let (ds, transform, analysis) = load(&a.data)?;
    let weights = if is_set(&a.w) {
        Some(build_weights(&a.w, &ds, &analysis, !a.no_standardize, None)?)
    } else if a.method.uses_sar() {
        return Err(Error::invalid(format!("method {} needs a weights matrix", a.method)));
    } else {
        None
    };
    let cfg = DetectConfig {
        scan: ScanOptions {
            mc_replicates: a.mc,
            alpha_level: a.alpha,
            max_clusters: a.max_clusters,
            seed: a.seed,
        },
        max_fraction: a.max_fraction,
        transform,
    };
    let det = detect(&ds, weights.as_ref().map(|w| &w.0), a.method, &cfg)?;
    let ids = |r: &ClusterReport| -> Vec<&str> {
        r.cluster.members.iter().map(|&i| ds.layout().sites()[i].id.as_str()).collect()
    };
    let info = weights.as_ref().map(|w| &w.1);
    let report = ScanReport {
        method: a.method,
        n_sites: ds.len(),
        transform,
        mc_replicates: a.mc,
        alpha_level: a.alpha,
        seed: a.seed,
        weights: info,
        rho: det.rho.as_ref(),
        most_likely: ClusterOut {
            report: &det.most_likely,
            site_ids: ids(&det.most_likely),
        },
        clusters: det.clusters.iter().map(|c| ClusterOut { report: c, site_ids: ids(c) }).collect(),
    };
    io::ensure_dir(&a.out)?;
    let json = a.out.join("report.json");
    let csv = a.out.join("clusters.csv");
    io::write_json(&json, &report)?;
    io::write_string(&csv, &io::report_csv(&det.clusters))?;

    let mut m = RunManifest::new("scan", argv.to_vec());
    m.inputs.push(a.data.data.clone());
    m.inputs.extend(a.w.weights.iter().chain(&a.w.contiguity).cloned());
    m.method = Some(a.method.to_string());
    m.weights = info.map(|i| i.description.clone());
    m.mc_replicates = Some(a.mc);
    m.alpha_level = Some(a.alpha);
    m.seed = Some(a.seed);
    m.rho_hat = det.rho.as_ref().map(|r| r.rho_hat);
    m.delta_bic = det.rho.as_ref().map(|r| r.delta_bic);
    m.selected_k = info.and_then(|i| i.selected_k);
    m.selected_morans_i = info.and_then(|i| i.selected_k.and(i.morans_i));
    m.outputs = vec![json, csv];
    finish_manifest(m, &a.out, start)?;
    println!(
        "most likely cluster: {} sites, statistic {:.4}, p = {}; {} significant cluster(s)",
        det.most_likely.cluster.size(),
        det.most_likely.statistic,
        det.most_likely.p_value,
        det.clusters.len()
    );
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, argv: &[String]) -> Result<()> {
    let start = Instant::now();
    let spec = io::read_sim_config(&a.config)?;
    let res = run_arms(&spec.config, &spec.arms)?;
    io::ensure_dir(&a.out)?;
    let csv = a.out.join("results.csv");
    let json = a.out.join("results.json");
    io::write_string(&csv, &res.to_csv())?;
    io::write_string(&json, &(res.to_json() + "\n"))?;
    let mut m = RunManifest::new("simulate", argv.to_vec());
    m.inputs.push(a.config.clone());
    m.method = Some(spec.arms.iter().map(|x| x.label()).collect::<Vec<_>>().join(","));
    m.weights = Some("row-standardized contiguity of the simulation layout".into());
    m.mc_replicates = Some(spec.config.mc_replicates);
    m.alpha_level = Some(spec.config.alpha_level);
    m.seed = Some(spec.config.seed);
    m.outputs = vec![csv, json];
    finish_manifest(m, &a.out, start)?;
    println!("{} cells written to {}", res.cells.len(), a.out.display());
    Ok(())
}

fn cmd_weights(a: &WeightsCmdArgs, argv: &[String]) -> Result<()> {
    let start = Instant::now();
    let (ds, _, analysis) = load(&a.data)?;
    let (w, info) = build_weights(&a.w, &ds, &analysis, a.standardize, None)?;
    io::ensure_dir(&a.out)?;
    let wpath = a.out.join("weights.csv");
    let mpath = a.out.join("morans_i.csv");
    io::write_weights_csv(&wpath, &w)?;
    let mut table = String::from("candidate,morans_i\n");
    let rows: Vec<(String, Option<f64>)> = if info.candidates.is_empty() {
        vec![(info.description.clone(), info.morans_i)]
    } else {
        info.candidates.clone()
    };
    for (label, v) in rows {
        table.push_str(&format!("{label},{}\n", v.map_or("NA".to_string(), |x| x.to_string())));
    }
    io::write_string(&mpath, &table)?;
    let mut m = RunManifest::new("weights", argv.to_vec());
    m.inputs.push(a.data.data.clone());
    m.inputs.extend(a.w.weights.iter().chain(&a.w.contiguity).cloned());
    m.weights = Some(info.description.clone());
    m.selected_k = info.selected_k;
    m.selected_morans_i = info.morans_i;
    m.outputs = vec![wpath, mpath];
    finish_manifest(m, &a.out, start)?;
    println!("{} nonzero weights; Moran's I = {}", w.nnz(), info.morans_i.map_or("NA".into(), |x| format!("{x:.6}")));
    Ok(())
}

fn cmd_moran(a: &MoranArgs, argv: &[String]) -> Result<()> {
    let start = Instant::now();
    let (ds, _, analysis) = load(&a.data)?;
    let (w, info) = build_weights(&a.w, &ds, &analysis, !a.no_standardize, Some(3))?;
    let i = morans_i(&w, &analysis)?;
    io::ensure_dir(&a.out)?;
    let path = a.out.join("moran.json");
    io::write_json(&path, &serde_json::json!({ "morans_i": i, "weights": info }))?;
    let mut m = RunManifest::new("moran", argv.to_vec());
    m.inputs.push(a.data.data.clone());
    m.weights = Some(info.description.clone());
    m.selected_k = info.selected_k;
    m.selected_morans_i = info.selected_k.map(|_| i);
    m.outputs = vec![path];
    finish_manifest(m, &a.out, start)?;
    println!("{i:.6}");
    Ok(())
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<()> {
    match &cli.command {
        Command::Scan(a) => cmd_scan(a, argv),
        Command::Simulate(a) => cmd_simulate(a, argv),
        Command::Weights(a) => cmd_weights(a, argv),
        Command::Moran(a) => cmd_moran(a, argv),
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let argv: Vec<String> = argv.iter().skip(1).map(|s| s.to_string_lossy().into_owned()).collect();
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &argv)),
            Err(e) => Err(Error::invalid(format!("cannot start {t} threads: {e}"))),
        },
        None => dispatch(&cli, &argv),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                3
            }
        }
    }
}

/// Entry point for the binary.
pub fn run() -> ExitCode {
    ExitCode::from(run_with(std::env::args_os()) as u8)
}
