//! Batch pipeline around the graphmeta library.
//!
//! Subcommands: profile | regress | generate | convolve | separate | experiment.
//! Exit codes: 0 success, 1 error, 2 profile completed with flagged
//! (undefined) properties. Thread count comes from --threads or the
//! GRAPHMETA_THREADS environment variable.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use graphmeta::experiment::{run_experiment, ExperimentSpec};
use graphmeta::generator::{
    calibrate_gini, sample_dc_csbm, sample_world, DcCsbmParams, WorldParams,
};
use graphmeta::graph::io as gio;
use graphmeta::graph::{FeatureMatrix, Graph, LabelVector};
use graphmeta::msglasso;
use graphmeta::msglasso::io as mio;
use graphmeta::properties::{profile, ProfileOptions, PropertyVector};
use graphmeta::separability::{convolve, theorem1_sweep, SweepConfig};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "graphmeta",
    about = "Graph metadata toolkit: property profiling, sparse group lasso, synthetic generators, separability and accuracy sweeps"
)]
struct Cli {
    /// Worker threads (overrides GRAPHMETA_THREADS; default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the 15 dataset properties of a graph (plus features/labels).
    Profile(ProfileArgs),
    /// Standardize metadata tables and fit the multivariate sparse group lasso.
    Regress(RegressArgs),
    /// Sample a synthetic dataset and write it with a measured manifest.
    Generate(GenerateArgs),
    /// Apply the single-layer graph convolution to a feature table.
    Convolve(ConvolveArgs),
    /// Run the dimension sweep of the separability check.
    Separate(SeparateArgs),
    /// Run a controlled accuracy sweep with the linear proxy classifier.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    #[value(name = "edge-list-tsv", alias = "tsv")]
    EdgeListTsv,
    Json,
}

impl From<FormatArg> for gio::GraphFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::EdgeListTsv => gio::GraphFormat::EdgeListTsv,
            FormatArg::Json => gio::GraphFormat::Json,
        }
    }
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "edge-list-tsv")]
    format: FormatArg,
    /// Treat the edge list as directed.
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Clamp multiplicities in degree-based statistics too.
    #[arg(long)]
    clamp_multiplicities: bool,
    /// Compute Gini-Degree on augmented (self-loop) degrees.
    #[arg(long)]
    augmented_gini: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ImputeArg {
    Drop,
    Mean,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ZeroVarArg {
    Drop,
    Error,
}

#[derive(Args)]
struct RegressArgs {
    #[arg(long)]
    properties: PathBuf,
    #[arg(long)]
    performance: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Entrywise penalty; fits a single solve when given.
    #[arg(long)]
    lambda1: Option<f64>,
    /// Row-group penalty for the single solve (default 0).
    #[arg(long, default_value_t = 0.0)]
    lambda_g: f64,
    /// Path length when no explicit lambda is given.
    #[arg(long, default_value_t = 30)]
    path_len: usize,
    /// lambda_g / lambda1 along the path.
    #[arg(long, default_value_t = 1.0)]
    path_ratio: f64,
    /// Smallest path lambda as a fraction of lambda_max.
    #[arg(long, default_value_t = 1e-3)]
    path_min_ratio: f64,
    /// Select lambda by leave-one-dataset-out cross-validation.
    #[arg(long)]
    cv: bool,
    #[arg(long, value_enum, default_value = "drop")]
    impute: ImputeArg,
    #[arg(long, value_enum, default_value = "drop")]
    zero_variance: ZeroVarArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    DcCsbm,
    World,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// JSON parameter file (DcCsbmParams or WorldParams).
    #[arg(long)]
    params: PathBuf,
    /// Override the seed in the parameter file.
    #[arg(long)]
    seed: Option<u64>,
    /// Calibrate the world power exponent to this target Gini first.
    #[arg(long)]
    calibrate_gini: Option<f64>,
    #[arg(long, default_value_t = 0.02)]
    calibrate_tol: f64,
    /// Clamp multi-edges to simple edges in the emitted graph.
    #[arg(long)]
    simple: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ConvolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "edge-list-tsv")]
    format: FormatArg,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeparateArgs {
    /// Sweep configuration JSON (SweepConfig).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Force the chance-level control (p = q, coincident means).
    #[arg(long)]
    control: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment specification JSON (ExperimentSpec).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("GRAPHMETA_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: could not configure {t} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::Profile(args) => cmd_profile(args),
        Command::Regress(args) => cmd_regress(args).map(|_| 0),
        Command::Generate(args) => cmd_generate(args).map(|_| 0),
        Command::Convolve(args) => cmd_convolve(args).map(|_| 0),
        Command::Separate(args) => cmd_separate(args).map(|_| 0),
        Command::Experiment(args) => cmd_experiment(args).map(|_| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_inputs(
    graph: &Path,
    format: FormatArg,
    directed: bool,
    features: Option<&Path>,
    labels: Option<&Path>,
) -> Result<(gio::LoadedGraph, Option<FeatureMatrix>, Option<LabelVector>)> {
    let loaded = gio::load_graph(graph, format.into(), directed)
        .with_context(|| format!("loading graph {}", graph.display()))?;
    let x = features
        .map(|p| {
            gio::load_features_csv(p, Some(&loaded.id_map), loaded.graph.n())
                .with_context(|| format!("loading features {}", p.display()))
        })
        .transpose()?;
    let y = labels
        .map(|p| {
            gio::load_labels_csv(p, Some(&loaded.id_map), loaded.graph.n())
                .with_context(|| format!("loading labels {}", p.display()))
        })
        .transpose()?;
    Ok((loaded, x, y))
}

fn cmd_profile(args: ProfileArgs) -> Result<u8> {
    let (loaded, x, y) = load_inputs(
        &args.graph,
        args.format,
        args.directed,
        args.features.as_deref(),
        args.labels.as_deref(),
    )?;
    if loaded.self_loops_dropped > 0 {
        eprintln!(
            "warning: dropped {} self-loop line(s)",
            loaded.self_loops_dropped
        );
    }
    let opts = ProfileOptions {
        count_multiplicities: !args.clamp_multiplicities,
        augmented_gini: args.augmented_gini,
    };
    let pv = profile(&loaded.graph, x.as_ref(), y.as_ref(), opts);
    fs::create_dir_all(&args.out_dir)?;
    let dataset = args
        .graph
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "dataset".into());
    let mut csv = Vec::new();
    pv.write_csv(&dataset, &mut csv)?;
    fs::write(args.out_dir.join("properties.csv"), csv)?;
    write_json(&args.out_dir.join("properties.json"), &pv.to_json())?;
    loaded.id_map.write_csv(&args.out_dir.join("id_map.csv"))?;
    for (name, reason) in &pv.skipped {
        eprintln!("flagged: {name}: {reason}");
    }
    println!(
        "profiled {} nodes, {} edges: {} of 15 properties defined",
        loaded.graph.n(),
        loaded.graph.m(),
        pv.defined_count()
    );
    Ok(if pv.has_flags() { 2 } else { 0 })
}

#[derive(Serialize)]
struct RegressDiagnostics {
    lambda1: f64,
    lambda_g: f64,
    iterations: usize,
    converged: bool,
    kkt_residual: f64,
    objective_initial: f64,
    objective_final: f64,
    dropped_rows: Vec<String>,
    imputed_cells: usize,
    dropped_x_columns: Vec<String>,
    dropped_y_columns: Vec<String>,
    selected_by_cv: bool,
}

fn cmd_regress(args: RegressArgs) -> Result<()> {
    let props = mio::read_table(&args.properties)?;
    let perf = mio::read_table(&args.performance)?;
    let policy = match args.impute {
        ImputeArg::Drop => mio::MissingPolicy::DropRow,
        ImputeArg::Mean => mio::MissingPolicy::MeanImpute,
    };
    let (raw, missing) = mio::build_metadata_table(&props, &perf, policy)?;
    let zv = match args.zero_variance {
        ZeroVarArg::Drop => msglasso::ZeroVariancePolicy::Drop,
        ZeroVarArg::Error => msglasso::ZeroVariancePolicy::Error,
    };
    let (table, std_info) = msglasso::standardize(&raw, zv)?;
    fs::create_dir_all(&args.out_dir)?;
    let opts = msglasso::SolveOptions::default();

    let (solution, selected_by_cv) = if let Some(l1) = args.lambda1 {
        (msglasso::solve(&table, l1, args.lambda_g, opts)?, false)
    } else {
        let path = msglasso::regularization_path(
            &table,
            args.path_ratio,
            args.path_len,
            args.path_min_ratio,
            opts,
        )?;
        let mut path_csv = String::from(
            "lambda1,lambda_g,support_rows,support_entries,kkt_residual,iterations,converged\n",
        );
        for pt in &path {
            path_csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                pt.lambda1,
                pt.lambda_g,
                pt.support_rows,
                pt.support_entries,
                pt.solution.kkt_residual,
                pt.solution.iterations,
                pt.solution.converged
            ));
        }
        fs::write(args.out_dir.join("path.csv"), path_csv)?;
        if args.cv {
            let report = msglasso::cross_validate(
                &raw,
                args.path_ratio,
                args.path_len,
                args.path_min_ratio,
                opts,
            )?;
            let mut cv_csv = String::from("lambda1,lambda_g,mean_squared_error\n");
            for p in &report.points {
                cv_csv.push_str(&format!(
                    "{},{},{}\n",
                    p.lambda1, p.lambda_g, p.mean_squared_error
                ));
            }
            fs::write(args.out_dir.join("cv.csv"), cv_csv)?;
            let best = &report.points[report.best_index];
            (msglasso::solve(&table, best.lambda1, best.lambda_g, opts)?, true)
        } else {
            println!(
                "wrote path.csv with {} points; pass --lambda1 or --cv to emit coefficients",
                path.len()
            );
            write_json(
                &args.out_dir.join("diagnostics.json"),
                &serde_json::json!({
                    "mode": "path-only",
                    "points": path.len(),
                    "dropped_rows": missing.dropped_rows,
                    "dropped_x_columns": std_info.dropped_x,
                    "dropped_y_columns": std_info.dropped_y,
                }),
            )?;
            return Ok(());
        }
    };

    mio::write_coefficients_csv(
        &solution,
        &table.x_names,
        &table.y_names,
        &args.out_dir.join("coefficients.csv"),
    )?;
    let report = msglasso::salient_report(&solution, &table.x_names, &table.y_names);
    mio::write_salient_csv(&report, &args.out_dir.join("salient.csv"))?;
    let diag = RegressDiagnostics {
        lambda1: solution.lambda1,
        lambda_g: solution.lambda_g,
        iterations: solution.iterations,
        converged: solution.converged,
        kkt_residual: solution.kkt_residual,
        objective_initial: *solution.objective_trace.first().unwrap_or(&f64::NAN),
        objective_final: *solution.objective_trace.last().unwrap_or(&f64::NAN),
        dropped_rows: missing.dropped_rows,
        imputed_cells: missing.imputed_cells.len(),
        dropped_x_columns: std_info.dropped_x,
        dropped_y_columns: std_info.dropped_y,
        selected_by_cv,
    };
    write_json(
        &args.out_dir.join("diagnostics.json"),
        &serde_json::to_value(&diag)?,
    )?;
    println!(
        "solved at lambda1 = {}, lambda_g = {}: kkt = {:.3e}, converged = {}",
        solution.lambda1, solution.lambda_g, solution.kkt_residual, solution.converged
    );
    Ok(())
}

#[derive(Serialize)]
struct Manifest {
    model: String,
    seed: u64,
    n: usize,
    m: u64,
    simple: bool,
    max_edge_intensity: Option<f64>,
    sparse_regime_warning: bool,
    calibrated_gini: Option<f64>,
    params: serde_json::Value,
    properties: PropertyVector,
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.params)
        .with_context(|| format!("reading {}", args.params.display()))?;
    fs::create_dir_all(&args.out_dir)?;

    let (graph, features, labels, manifest) = match args.model {
        ModelArg::DcCsbm => {
            let mut params: DcCsbmParams = serde_json::from_str(&text)?;
            if let Some(seed) = args.seed {
                params.seed = seed;
            }
            if args.calibrate_gini.is_some() {
                bail!("--calibrate-gini applies to the world model only");
            }
            let sample = sample_dc_csbm(&params)?;
            let max_intensity = sample.max_edge_intensity;
            let simple = args.simple;
            let params_json = serde_json::to_value(&params)?;
            let seed = params.seed;
            let manifest = move |pv: PropertyVector, g: &Graph| Manifest {
                model: "dc-csbm".into(),
                seed,
                n: g.n(),
                m: g.m(),
                simple,
                max_edge_intensity: Some(max_intensity),
                sparse_regime_warning: max_intensity > 30.0,
                calibrated_gini: None,
                params: params_json,
                properties: pv,
            };
            (sample.graph, sample.features, sample.labels, Box::new(manifest) as Box<dyn FnOnce(PropertyVector, &Graph) -> Manifest>)
        }
        ModelArg::World => {
            let mut params: WorldParams = serde_json::from_str(&text)?;
            if let Some(seed) = args.seed {
                params.seed = seed;
            }
            let mut calibrated_gini = None;
            if let Some(target) = args.calibrate_gini {
                let out = calibrate_gini(&params, target, args.calibrate_tol, 5)?;
                calibrated_gini = Some(out.measured_gini);
                params = out.params;
            }
            let sample = sample_world(&params)?;
            let params_clone = params.clone();
            let simple = args.simple;
            let manifest = move |pv: PropertyVector, g: &Graph| Manifest {
                model: "world".into(),
                seed: params_clone.seed,
                n: g.n(),
                m: g.m(),
                simple,
                max_edge_intensity: None,
                sparse_regime_warning: false,
                calibrated_gini,
                params: serde_json::to_value(&params_clone).unwrap(),
                properties: pv,
            };
            (sample.graph, sample.features, sample.labels, Box::new(manifest) as Box<dyn FnOnce(PropertyVector, &Graph) -> Manifest>)
        }
    };

    let graph = if args.simple { graph.clamped() } else { graph };
    let pv = profile(&graph, Some(&features), Some(&labels), ProfileOptions::default());
    gio::write_edge_list_tsv(&graph, &args.out_dir.join("edges.tsv"))?;
    gio::write_features_csv(&features, &args.out_dir.join("features.csv"))?;
    gio::write_labels_csv(&labels, &args.out_dir.join("labels.csv"))?;
    let manifest = manifest(pv, &graph);
    if manifest.sparse_regime_warning {
        eprintln!(
            "warning: max per-pair edge intensity {:.2} leaves the sparse regime",
            manifest.max_edge_intensity.unwrap_or(f64::NAN)
        );
    }
    write_json(&args.out_dir.join("manifest.json"), &serde_json::to_value(&manifest)?)?;
    println!(
        "generated n = {}, m = {} into {}",
        manifest.n,
        manifest.m,
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_convolve(args: ConvolveArgs) -> Result<()> {
    let (loaded, x, _) = load_inputs(&args.graph, args.format, false, Some(&args.features), None)?;
    let x = x.expect("features requested");
    let cf = convolve(&loaded.graph, &x)?;
    let out = FeatureMatrix::new(cf.values)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    gio::write_features_csv(&out, &args.out)?;
    println!("convolved {} rows into {}", out.rows(), args.out.display());
    Ok(())
}

fn cmd_separate(args: SeparateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg: SweepConfig = serde_json::from_str(&text)?;
    if let Some(seeds) = args.seeds {
        cfg.seeds = seeds;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.control {
        cfg.control = true;
    }
    fs::create_dir_all(&args.out_dir)?;
    write_json(
        &args.out_dir.join("config_resolved.json"),
        &serde_json::to_value(&cfg)?,
    )?;
    let result = theorem1_sweep(&cfg)?;
    let csv = result.to_csv();
    fs::write(args.out_dir.join("sweep.csv"), &csv)?;
    let medians: Vec<(f64, f64)> = result
        .medians
        .iter()
        .map(|&(d, f)| (d as f64, f))
        .collect();
    let svg = graphmeta::chart::line_chart_svg(
        "separability fraction vs feature dimension",
        "feature dimension d",
        "median fraction",
        &[graphmeta::chart::Series {
            label: if cfg.control { "control" } else { "signal" },
            points: &medians,
        }],
        &csv,
    );
    fs::write(args.out_dir.join("sweep.svg"), svg)?;
    for (d, f) in &result.medians {
        println!("d = {d}: median fraction = {f:.4}");
    }
    println!(
        "monotone non-decreasing: {}",
        result.monotone_non_decreasing
    );
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text)?;
    if let Some(seeds) = args.seeds {
        spec.seeds_per_point = seeds;
    }
    if let Some(seed) = args.seed {
        spec.base.seed = seed;
    }
    fs::create_dir_all(&args.out_dir)?;
    write_json(
        &args.out_dir.join("config_resolved.json"),
        &serde_json::to_value(&spec)?,
    )?;
    let result = run_experiment(&spec)?;
    fs::write(args.out_dir.join("summary.csv"), result.summary_csv())?;
    fs::write(args.out_dir.join("cells.csv"), result.cells_csv())?;
    let x_label = match spec.sweep {
        graphmeta::experiment::SweepVariable::GiniDegree => "measured Gini-Degree",
        graphmeta::experiment::SweepVariable::AverageDegree => "measured average degree",
        graphmeta::experiment::SweepVariable::EdgeHomogeneity => "measured edge homogeneity",
        graphmeta::experiment::SweepVariable::FeatureClusterVariance => {
            "measured in-feature similarity"
        }
    };
    fs::write(args.out_dir.join("chart.svg"), result.chart_svg(x_label))?;
    println!(
        "spearman convolved = {:.4}, raw control = {:.4}",
        result.spearman_convolved, result.spearman_raw
    );
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
