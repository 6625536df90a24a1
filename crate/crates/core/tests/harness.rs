use uavnet::harness::io::{load_models, read_csv, save_models};
use uavnet::harness::{
    metric_rows, run_experiment, summarize, write_run, EpisodeMetrics, MetricsRow, RunManifest, Scheme, SeedRun,
};
use uavnet::scenario::{MissionConfig, ScenarioConfig};

fn config() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.area_width_m = 320.0;
    cfg.area_height_m = 320.0;
    cfg.bs_count = 4;
    cfg.ue_count = 8;
    cfg.uav_missions = vec![MissionConfig::default(); 2];
    cfg.training_iterations = 40;
    cfg
}

fn write(dir: &std::path::Path, name: &str, runs: &[SeedRun], cfg: &ScenarioConfig, seeds: &[u64]) -> Vec<MetricsRow> {
    let out = dir.join(name);
    let manifest_name = format!("{}.manifest.json", out.file_stem().unwrap().to_string_lossy());
    let rows = metric_rows(runs, &manifest_name);
    let mut manifest = RunManifest::begin("test", &cfg.hash(), seeds);
    write_run(&out, &rows, &summarize(&rows), &mut manifest).unwrap();
    rows
}

#[test]
fn rows_summary_and_byte_identical_rerun() {
    let cfg = config();
    let seeds = [1, 2, 3];
    let dir = tempfile::tempdir().unwrap();
    let runs = run_experiment(Scheme::Trained, &cfg, &seeds, 2, None).unwrap();
    let rows = write(dir.path(), "a.csv", &runs, &cfg, &seeds);
    assert_eq!(rows.len(), 6);
    let back: Vec<MetricsRow> = read_csv(&dir.path().join("a.csv")).unwrap();
    assert_eq!(back.len(), 6);
    let summary = std::fs::read_to_string(dir.path().join("a.summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().ends_with("a.manifest.json"));

    let again = run_experiment(Scheme::Trained, &cfg, &seeds, 2, None).unwrap();
    write(dir.path(), "b.csv", &again, &cfg, &seeds);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    let b = String::from_utf8(b)
        .unwrap()
        .replace("b.manifest.json", "a.manifest.json");
    assert_eq!(String::from_utf8(a).unwrap(), b);
}

#[test]
fn summary_means_are_row_means() {
    let cfg = config();
    let seeds = [4, 5];
    let runs = run_experiment(Scheme::Baseline, &cfg, &seeds, 3, None).unwrap();
    let rows = metric_rows(&runs, "m");
    let summary = summarize(&rows);
    for (k, name) in MetricsRow::NUMERIC.iter().enumerate() {
        let direct = rows.iter().map(|r| r.numeric()[k]).sum::<f64>() / rows.len() as f64;
        let s = summary.get(name).unwrap().mean;
        assert!(
            (s - direct).abs() <= 1e-9 * direct.abs().max(1e-300),
            "{name}: {s} vs {direct}"
        );
    }
}

/// Recomputes a row from raw stage records without the metrics module.
fn recompute(cfg: &ScenarioConfig, out: &uavnet::agent::EpisodeOutcome) -> (f64, f64, f64, f64) {
    let dt = cfg.grid_step_m / cfg.uav_speed_m_s;
    let j = cfg.uav_count();
    let mut steps = vec![0.0; j];
    let mut delay = vec![0.0; j];
    let mut energy = vec![0.0; j];
    for rec in &out.records {
        for s in rec.uavs.iter().filter(|s| s.active) {
            steps[s.uav] += 1.0;
            delay[s.uav] += s.delay_s;
            energy[s.uav] += s.power_w * dt;
        }
    }
    let acted: Vec<usize> = (0..j).filter(|&u| steps[u] > 0.0).collect();
    let mean_delay = acted.iter().map(|&u| delay[u] / steps[u]).sum::<f64>() / acted.len().max(1) as f64;
    let ue: f64 = (0..cfg.ue_count)
        .map(|q| out.records.iter().map(|r| r.ue_rates_bps[q]).sum::<f64>() / out.records.len() as f64)
        .sum::<f64>()
        / cfg.ue_count as f64;
    (
        steps.iter().sum::<f64>() / j as f64,
        mean_delay,
        energy.iter().sum::<f64>() / j as f64,
        ue,
    )
}

#[test]
fn metrics_recomputable_from_records() {
    let cfg = config();
    let runs = run_experiment(Scheme::Trained, &cfg, &[6, 7], 4, None).unwrap();
    for run in &runs {
        for (m, out) in run.metrics.iter().zip(&run.outcomes) {
            let (steps, delay, energy, ue) = recompute(&cfg, out);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1e-12);
            assert!(close(m.mean_steps(), steps));
            assert!(close(m.mean_delay_s(), delay));
            assert!(close(m.mean_energy_j(), energy));
            assert!(close(m.mean_ue_rate_bps(), ue));
            assert!(m.uavs.iter().all(|u| u.steps <= cfg.episode_step_cap()));
            let ctx = uavnet::harness::EpisodeContext::new(&cfg, Scheme::Trained, run.seed, m.episode);
            assert_eq!(&EpisodeMetrics::from_records(&ctx, &out.records), m);
        }
    }
}

#[test]
fn baseline_steps_are_manhattan() {
    let cfg = config();
    let runs = run_experiment(Scheme::Baseline, &cfg, &[8, 9], 3, None).unwrap();
    for run in &runs {
        for (m, missions) in run.metrics.iter().zip(&run.missions) {
            for (u, mission) in m.uavs.iter().zip(missions) {
                assert_eq!(
                    u.steps,
                    run.grid.manhattan(mission.origin, mission.destination).unwrap()
                );
                assert!(u.arrived);
            }
        }
    }
}

#[test]
fn checkpoints_round_trip_through_files() {
    let cfg = config();
    let runs = run_experiment(Scheme::Trained, &cfg, &[10], 1, None).unwrap();
    let mut models = runs[0].training.as_ref().unwrap().models.clone();
    // reservoir state is per-episode and not part of a checkpoint
    models.iter_mut().for_each(|m| m.reset_states());
    let dir = tempfile::tempdir().unwrap();
    save_models(dir.path(), &models, &cfg.hash(), 10).unwrap();
    let (back, index) = load_models(dir.path(), Some(&cfg.hash())).unwrap();
    assert_eq!(back, models);
    assert_eq!(index.seed, 10);
    assert!(load_models(dir.path(), Some("different")).is_err());
    std::fs::remove_file(dir.path().join("uav_1.esn")).unwrap();
    assert!(load_models(dir.path(), None).is_err());

    // saved models reproduce the in-memory test metrics
    let reloaded = run_experiment(Scheme::Trained, &cfg, &[10], 1, Some(&models)).unwrap();
    assert_eq!(reloaded[0].metrics, runs[0].metrics);
}
