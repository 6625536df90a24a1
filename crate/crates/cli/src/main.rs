use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use uavnet::harness::io::{manifest_path, write_csv, write_json};
use uavnet::harness::{
    bounds_sweep, default_bounds_axes, export_figure_data, figure_points, load_models, metric_rows, run_experiment,
    save_models, summarize, train_seed, write_run, Figure, RunManifest, Scheme,
};
use uavnet::oracle::exhaustive_best_return;
use uavnet::scenario::{build_world, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "uavnet",
    version,
    about = "Cellular-connected UAV path, power and association learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV or JSON file (a directory for `train`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeedList {
    /// Comma-separated seeds; defaults to the configured seed (the training seed for `test`).
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model per UAV and write checkpoints to a directory.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Evaluate saved models greedily.
    Test {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seeds: SeedList,
        #[arg(long)]
        models: PathBuf,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        /// Load checkpoints even if they were trained under another config.
        #[arg(long)]
        allow_hash_mismatch: bool,
    },
    /// Run the shortest-path baseline.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seeds: SeedList,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
    },
    /// Sweep the analytic altitude bounds over SINR thresholds and power levels.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive optimum for a small single-UAV world.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        horizon: usize,
    },
    /// Run the experiments behind one figure and write plot-ready data.
    Export {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seeds: SeedList,
        #[arg(long)]
        figure: Figure,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
    },
}

fn load_config(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.rng_seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Hash that checkpoints are keyed by: the scenario without the seed and
/// iteration count, which only steer how training ran.
fn model_hash(cfg: &ScenarioConfig) -> String {
    let mut c = cfg.clone();
    c.rng_seed = 0;
    c.training_iterations = 0;
    c.hash()
}

fn seeds_or(list: &SeedList, fallback: u64) -> Vec<u64> {
    if list.seeds.is_empty() {
        vec![fallback]
    } else {
        list.seeds.clone()
    }
}

fn write_manifest(out: &Path, mut manifest: RunManifest) -> Result<()> {
    manifest.finish(&[out]);
    write_json(&manifest_path(out), &manifest)?;
    Ok(())
}

fn run_scheme(
    scheme: Scheme,
    cfg: &ScenarioConfig,
    seeds: &[u64],
    episodes: usize,
    models: Option<&[uavnet::deep_esn::DeepEsn]>,
    out: &Path,
) -> Result<()> {
    let name = scheme.to_string();
    let mut manifest = RunManifest::begin(
        if scheme == Scheme::Trained { "test" } else { &name },
        &cfg.hash(),
        seeds,
    );
    let runs = run_experiment(scheme, cfg, seeds, episodes, models)?;
    let mfile = manifest_path(out);
    let rows = metric_rows(&runs, &mfile.file_name().unwrap_or_default().to_string_lossy());
    write_run(out, &rows, &summarize(&rows), &mut manifest)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { common, iterations } => {
            let mut cfg = load_config(&common)?;
            if let Some(n) = iterations {
                cfg.training_iterations = n;
            }
            let seed = cfg.rng_seed;
            let hash = model_hash(&cfg);
            let manifest = RunManifest::begin("train", &cfg.hash(), &[seed]);
            let outcome = train_seed(&cfg, seed)?;
            save_models(&common.out, &outcome.models, &hash, seed)
                .with_context(|| format!("writing models to {}", common.out.display()))?;
            let stats = common.out.join("training.csv");
            write_csv(&stats, &outcome.stats)?;
            write_manifest(&stats, manifest)?;
        }
        Command::Test {
            common,
            seeds,
            models,
            episodes,
            allow_hash_mismatch,
        } => {
            let cfg = load_config(&common)?;
            let hash = model_hash(&cfg);
            let expected = (!allow_hash_mismatch).then_some(hash.as_str());
            let (models, index) = load_models(&models, expected)?;
            let seeds = seeds_or(&seeds, index.seed);
            run_scheme(Scheme::Trained, &cfg, &seeds, episodes, Some(&models), &common.out)?;
        }
        Command::Baseline {
            common,
            seeds,
            episodes,
        } => {
            let cfg = load_config(&common)?;
            let seeds = seeds_or(&seeds, cfg.rng_seed);
            run_scheme(Scheme::Baseline, &cfg, &seeds, episodes, None, &common.out)?;
        }
        Command::Bounds { common } => {
            let cfg = load_config(&common)?;
            let manifest = RunManifest::begin("bounds", &cfg.hash(), &[cfg.rng_seed]);
            let (g, c, p) = default_bounds_axes(&cfg);
            write_csv(&common.out, &bounds_sweep(&cfg, &g, &c, &p))?;
            write_manifest(&common.out, manifest)?;
        }
        Command::Oracle { common, horizon } => {
            let cfg = load_config(&common)?;
            let manifest = RunManifest::begin("oracle", &cfg.hash(), &[cfg.rng_seed]);
            let world = build_world(&cfg, cfg.rng_seed)?;
            let best = exhaustive_best_return(&world, horizon)?;
            write_json(&common.out, &best)?;
            write_manifest(&common.out, manifest)?;
        }
        Command::Export {
            common,
            seeds,
            figure,
            episodes,
        } => {
            let cfg = load_config(&common)?;
            let seeds = seeds_or(&seeds, cfg.rng_seed);
            let manifest = RunManifest::begin("export", &cfg.hash(), &seeds);
            let points = figure_points(figure, &cfg, &seeds, episodes)?;
            export_figure_data(&points, figure, &common.out)?;
            write_manifest(&common.out, manifest)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<uavnet::Error>().map_or("io", error_kind);
            let msg = format!("{e:#}");
            eprintln!("{}", json!({ "error": kind, "message": msg }));
            ExitCode::FAILURE
        }
    }
}

fn error_kind(e: &uavnet::Error) -> &'static str {
    use uavnet::Error::*;
    match e {
        Config(_) | Toml(_) => "config",
        HashMismatch { .. } => "hash_mismatch",
        Checkpoint(_) => "checkpoint",
        EnumerationTooLarge { .. } => "enumeration_too_large",
        EmptyResults => "empty_results",
        Io { .. } | Csv(_) | Json(_) => "io",
        _ => "runtime",
    }
}
