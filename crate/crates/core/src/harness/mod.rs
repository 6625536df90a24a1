//! Experiment orchestration: seeded train/test/baseline runs, metric rows,
//! manifests, model checkpoints, the altitude-bound sweep and figure data.

pub mod figures;
pub mod io;
pub mod metrics;

pub use figures::{export_figure_data, figure_points, Figure, FigurePoint, FigureRow};
pub use io::{load_models, save_models, write_run, RunManifest};
pub use metrics::{summarize, EpisodeContext, EpisodeMetrics, MetricsRow, Scheme, Stat, Summary, UavMetrics};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{self, EpisodeOutcome, TrainOutcome};
use crate::baseline::run_baseline_episode;
use crate::deep_esn::DeepEsn;
use crate::error::Result;
use crate::game::altitude::{lower_altitude_raw, upper_altitude_raw, UpperBoundInputs};
use crate::scenario::{build_episode_world, Grid, Mission, MissionConfig, ScenarioConfig, World};
use crate::units::db_to_linear;

/// Episode ids at and above this value are test episodes; training uses
/// `1..=iterations`.
pub const TEST_EPISODE_BASE: u64 = 1 << 32;

pub fn training_world(config: &ScenarioConfig, seed: u64, iteration: usize) -> Result<World> {
    build_episode_world(config, seed, 1 + iteration as u64)
}

pub fn test_world(config: &ScenarioConfig, seed: u64, episode: usize) -> Result<World> {
    build_episode_world(config, seed, TEST_EPISODE_BASE + episode as u64)
}

pub fn train_seed(config: &ScenarioConfig, seed: u64) -> Result<TrainOutcome> {
    agent::train(config, seed, |i| training_world(config, seed, i))
}

/// Everything produced for one seed.
#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub scheme: Scheme,
    pub metrics: Vec<EpisodeMetrics>,
    pub outcomes: Vec<EpisodeOutcome>,
    pub missions: Vec<Vec<Mission>>,
    pub grid: Grid,
    pub training: Option<TrainOutcome>,
}

/// Runs `episodes` test episodes for one seed. The trained scheme uses
/// `models` when given and otherwise trains on this seed first.
pub fn run_seed(
    scheme: Scheme,
    config: &ScenarioConfig,
    seed: u64,
    episodes: usize,
    models: Option<&[DeepEsn]>,
) -> Result<SeedRun> {
    let training = match (scheme, models) {
        (Scheme::Trained, None) => Some(train_seed(config, seed)?),
        _ => None,
    };
    let models = models.or(training.as_ref().map(|t| t.models.as_slice()));
    let mut run = SeedRun {
        seed,
        scheme,
        metrics: Vec::with_capacity(episodes),
        outcomes: Vec::with_capacity(episodes),
        missions: Vec::with_capacity(episodes),
        grid: Grid::new(config.grid_cols(), config.grid_rows(), config.grid_step_m),
        training: None,
    };
    for e in 0..episodes {
        let mut world = test_world(config, seed, e)?;
        run.missions.push(world.missions.clone());
        let out = match scheme {
            Scheme::Trained => agent::test(&mut world, models.expect("trained models present"))?,
            Scheme::Baseline => run_baseline_episode(&mut world)?,
        };
        let ctx = EpisodeContext::new(config, scheme, seed, e);
        run.metrics.push(EpisodeMetrics::from_records(&ctx, &out.records));
        run.outcomes.push(out);
    }
    run.training = training;
    Ok(run)
}

/// One [`SeedRun`] per seed, computed in parallel, returned in seed order.
pub fn run_experiment(
    scheme: Scheme,
    config: &ScenarioConfig,
    seeds: &[u64],
    episodes: usize,
    models: Option<&[DeepEsn]>,
) -> Result<Vec<SeedRun>> {
    config.validate()?;
    seeds
        .par_iter()
        .map(|&s| run_seed(scheme, config, s, episodes, models))
        .collect()
}

pub fn metric_rows(runs: &[SeedRun], manifest: &str) -> Vec<MetricsRow> {
    runs.iter()
        .flat_map(|r| r.metrics.iter().map(|m| m.row(manifest)))
        .collect()
}

/// `config` with `count` UAVs. Extra UAVs copy the first mission with random
/// endpoints.
pub fn with_uav_count(config: &ScenarioConfig, count: usize) -> ScenarioConfig {
    let mut c = config.clone();
    if c.uav_missions.len() != count {
        let template = MissionConfig {
            origin: None,
            destination: None,
            ..c.uav_missions.first().cloned().unwrap_or_default()
        };
        c.uav_missions = vec![template; count];
    }
    c
}

/// `config` with `count` BSs, keeping the UE-per-BS ratio.
pub fn with_bs_count(config: &ScenarioConfig, count: usize) -> ScenarioConfig {
    let mut c = config.clone();
    let per_bs = config.ue_count as f64 / config.bs_count as f64;
    c.bs_count = count;
    c.ue_count = (per_bs * count as f64).round() as usize;
    if c.nearest_bs_count > count {
        c.nearest_bs_count = count;
    }
    c
}

pub fn with_altitude(config: &ScenarioConfig, altitude_m: f64) -> ScenarioConfig {
    let mut c = config.clone();
    for m in &mut c.uav_missions {
        m.altitude_m = altitude_m;
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub gamma_db: f64,
    pub i_cap_w: f64,
    pub power_w: f64,
    pub h_max_m: f64,
    pub h_min_m: f64,
}

/// Default sweep: thresholds -3..=7 dB in 1 dB steps, the configured
/// interference cap, and power levels 1, mid and max of the first mission.
pub fn default_bounds_axes(config: &ScenarioConfig) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let gammas = (-3..=7).map(f64::from).collect();
    let caps = vec![config.interference_cap_w];
    let p_max = config.uav_missions.first().map_or(0.1, |m| m.max_power_w);
    let o = config.power_levels;
    let mut levels = vec![1, o.div_ceil(2), o];
    levels.dedup();
    let powers = levels.iter().map(|&l| l as f64 * p_max / o as f64).collect();
    (gammas, caps, powers)
}

/// Altitude bounds for a UAV directly above its serving BS (upper bound) or
/// above the neighbor BS (lower bound), unit fading and no co-channel
/// interference. Rows run power-major, then cap, then threshold.
pub fn bounds_sweep(config: &ScenarioConfig, gammas_db: &[f64], caps_w: &[f64], powers_w: &[f64]) -> Vec<BoundsRow> {
    let rbs = config.rbs_per_uav;
    let chi = config.min_altitude_m;
    let mut rows = Vec::new();
    for &p in powers_w {
        for &cap in caps_w {
            for &g in gammas_db {
                let inp = UpperBoundInputs {
                    power_w: p,
                    fading: vec![1.0; rbs],
                    interference_w: vec![0.0; rbs],
                    noise_w: config.noise_per_rb_w(),
                    sinr_threshold: db_to_linear(g),
                    carrier_hz: config.carrier_hz,
                    offset_sq_m2: 0.0,
                };
                let h_min = lower_altitude_raw(p, rbs, rbs as f64, cap * rbs as f64, config.carrier_hz, 0.0);
                rows.push(BoundsRow {
                    gamma_db: g,
                    i_cap_w: cap,
                    power_w: p,
                    h_max_m: upper_altitude_raw(&inp).max(chi),
                    h_min_m: h_min.max(chi),
                });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_has_33_rows() {
        let cfg = ScenarioConfig::default();
        let (g, c, p) = default_bounds_axes(&cfg);
        let rows = bounds_sweep(&cfg, &g, &c, &p);
        assert_eq!(rows.len(), 33);
        for col in rows.chunks(11) {
            assert!(col.windows(2).all(|w| w[1].h_max_m <= w[0].h_max_m));
        }
        assert!(rows
            .iter()
            .all(|r| r.h_min_m >= cfg.min_altitude_m && r.h_max_m >= cfg.min_altitude_m));
    }

    #[test]
    fn bs_count_keeps_ratio() {
        let c = with_bs_count(&ScenarioConfig::default(), 10);
        assert_eq!((c.bs_count, c.ue_count), (10, 20));
    }
}
