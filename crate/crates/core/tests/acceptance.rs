//! End-to-end acceptance checks. Each test prints one `[PASS]`/`[FAIL]`
//! line to stderr (bypassing output capture) and then asserts.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uavnet::agent::{test as run_test, train};
use uavnet::channel::{mdd1_delay_s, uav_path_loss_db, ue_path_loss_db};
use uavnet::deep_esn::{init_esn, spectral_radius};
use uavnet::game::altitude::{lower_altitude_raw, upper_altitude_raw, UpperBoundInputs};
use uavnet::game::{trajectory_valid, Constraint};
use uavnet::harness::{
    bounds_sweep, default_bounds_axes, metric_rows, run_experiment, summarize, with_altitude, with_bs_count,
    with_uav_count, Scheme, SeedRun,
};
use uavnet::oracle::{exhaustive_best_return, mdd1_sim};
use uavnet::scenario::{build_world, EsnParams, FadingMode, MissionConfig, ScenarioConfig};
use uavnet::units::db_to_linear;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] criterion {id}: {name} | {detail}\n");
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// ---------------------------------------------------------------- 1

#[test]
fn c1_formula_golden_values() {
    // independent evaluations from first principles
    let c = 299_792_458.0f64;
    let fspl = |d: f64, f: f64| 20.0 * (4.0 * std::f64::consts::PI * d * f / c).log10();
    let ue = |d: f64| 15.3 + 37.6 * d.log10();
    let mdd1 = |lambda: f64, mu: f64| lambda / (2.0 * mu * (mu - lambda)) + 1.0 / mu;

    let bits = 2000.0;
    let cases = [
        (
            "uav path loss dB",
            uav_path_loss_db(100.0, 2e9).unwrap(),
            fspl(100.0, 2e9),
            78.47,
        ),
        ("ue path loss dB", ue_path_loss_db(100.0).unwrap(), ue(100.0), 90.5),
        (
            "m/d/1 delay ms",
            1e3 * mdd1_delay_s(0.5, 1000.0 * bits, bits).unwrap(),
            1e3 * mdd1(0.5, 1000.0),
            1.00025,
        ),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, got, derived, golden) in cases {
        let ok = rel(got, derived) < 1e-3 && rel(got, golden) < 1e-3;
        pass &= ok;
        detail.push(format!("{name} {got:.5} (derived {derived:.5}, golden {golden})"));
    }
    report(1, "formula golden values", pass, &detail.join("; "));
    assert!(pass);
}

// ---------------------------------------------------------------- 2

#[test]
fn c2_mdd1_cross_validation() {
    let mu = 1000.0;
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 1..=8 {
        let rho = k as f64 / 10.0;
        let lambda = rho * mu;
        let sim = mdd1_sim(lambda, mu, 100_000, &mut rng).unwrap();
        let closed = mdd1_delay_s(lambda, mu * 8.0, 8.0).unwrap();
        worst = worst.max(rel(sim, closed));
    }
    let pass = worst < 0.05;
    report(
        2,
        "M/D/1 closed form vs simulation",
        pass,
        &format!("worst relative gap {worst:.4} over utilization 0.1..0.8"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 3

#[test]
fn c3_altitude_bound_directions() {
    let cfg = ScenarioConfig::default();
    let (gammas, _, powers) = default_bounds_axes(&cfg);
    let caps = [1e-12, 1e-11, 1e-10, 1e-9];
    let rows = bounds_sweep(&cfg, &gammas, &caps, &powers);
    let find = |p: f64, cap: f64, g: f64| {
        *rows
            .iter()
            .find(|r| r.power_w == p && r.i_cap_w == cap && r.gamma_db == g)
            .unwrap()
    };
    let mut violations = 0;
    for &p in &powers {
        for &cap in &caps {
            for w in gammas.windows(2) {
                violations += (find(p, cap, w[1]).h_max_m > find(p, cap, w[0]).h_max_m) as usize;
            }
        }
        for &g in &gammas {
            for w in caps.windows(2) {
                violations += (find(p, w[1], g).h_min_m > find(p, w[0], g).h_min_m) as usize;
            }
        }
    }
    for w in powers.windows(2) {
        for &cap in &caps {
            for &g in &gammas {
                let (lo, hi) = (find(w[0], cap, g), find(w[1], cap, g));
                violations += (hi.h_max_m < lo.h_max_m) as usize + (hi.h_min_m < lo.h_min_m) as usize;
            }
        }
    }

    // off-axis geometry with co-channel interference and uneven fading
    let fading = vec![0.7, 1.3, 0.9];
    let interference = vec![2e-13, 5e-14, 1e-12];
    let offsets = [0.0, 150.0f64.powi(2), 400.0f64.powi(2)];
    for &off in &offsets {
        let upper = |p: f64, g: f64| {
            upper_altitude_raw(&UpperBoundInputs {
                power_w: p,
                fading: fading.clone(),
                interference_w: interference.clone(),
                noise_w: cfg.noise_per_rb_w(),
                sinr_threshold: db_to_linear(g),
                carrier_hz: cfg.carrier_hz,
                offset_sq_m2: off,
            })
        };
        let lower = |p: f64, cap: f64| lower_altitude_raw(p, 3, 2.9, 3.0 * cap, cfg.carrier_hz, off);
        for &p in &powers {
            for w in gammas.windows(2) {
                violations += (upper(p, w[1]) > upper(p, w[0])) as usize;
            }
            for w in caps.windows(2) {
                violations += (lower(p, w[1]) > lower(p, w[0])) as usize;
            }
        }
        for w in powers.windows(2) {
            for &g in &gammas {
                violations += (upper(w[1], g) < upper(w[0], g)) as usize;
            }
            for &cap in &caps {
                violations += (lower(w[1], cap) < lower(w[0], cap)) as usize;
            }
        }
    }
    let pass = violations == 0;
    report(
        3,
        "altitude bound directions",
        pass,
        &format!(
            "{violations} violations over {} thresholds x {} caps x {} powers",
            gammas.len(),
            caps.len(),
            powers.len()
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 4

/// Dominant eigenvalue modulus by power iteration. Once the iterate has
/// settled into the dominant invariant subspace, either one step is a
/// scaling (real eigenvalue) or two steps satisfy a two-term recurrence
/// whose characteristic roots are the dominant complex pair.
fn power_iteration_radius(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.37).sin());
    for _ in 0..200_000 {
        v = a * &v;
        v /= v.norm();
    }
    let av = a * &v;
    let lam = v.dot(&av);
    if (&av - &v * lam).norm() < 1e-10 {
        return lam.abs();
    }
    let aav = a * &av;
    // least squares for A²v = α Av + β v
    let m = DMatrix::from_columns(&[av.clone(), v.clone()]);
    let coef = (m.transpose() * &m).lu().solve(&(m.transpose() * &aav)).unwrap();
    let (alpha, beta) = (coef[0], coef[1]);
    let disc = alpha * alpha + 4.0 * beta;
    if disc < 0.0 {
        (-beta).sqrt()
    } else {
        ((alpha.abs() + disc.sqrt()) / 2.0).abs()
    }
}

#[test]
fn c4_esn_properties() {
    let params = EsnParams::default();
    let mut detail = Vec::new();
    let mut pass = true;

    // spectral radius after initialization
    let mut worst_rho = 0.0f64;
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let esn = init_esn(&params, &[12, 6], 7, 20, &mut rng).unwrap();
        for layer in &esn.layers {
            let oracle = power_iteration_radius(&layer.w);
            worst_rho = worst_rho.max((oracle - params.spectral_radius_target).abs());
            worst_rho = worst_rho.max((spectral_radius(&layer.w) - params.spectral_radius_target).abs());
        }
    }
    pass &= worst_rho < 1e-6;
    detail.push(format!("radius error {worst_rho:.2e}"));

    // echo-state contraction
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut a = init_esn(&params, &[12, 6], 7, 20, &mut rng).unwrap();
    let mut b = a.clone();
    for (i, l) in b.layers.iter_mut().enumerate() {
        l.state = DVector::from_fn(l.size(), |k, _| if (k + i) % 2 == 0 { 0.8 } else { -0.8 });
    }
    let dist = |x: &uavnet::deep_esn::DeepEsn, y: &uavnet::deep_esn::DeepEsn| -> f64 {
        x.layers
            .iter()
            .zip(&y.layers)
            .map(|(p, q)| (&p.state - &q.state).norm_squared())
            .sum::<f64>()
            .sqrt()
    };
    let d0 = dist(&a, &b);
    let mut input_rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..200 {
        let v: Vec<f64> = (0..7).map(|_| rand::Rng::random::<f64>(&mut input_rng)).collect();
        a.step_states(&v).unwrap();
        b.step_states(&v).unwrap();
    }
    let ratio = dist(&a, &b) / d0;
    pass &= ratio < 1e-6;
    detail.push(format!("contraction {ratio:.2e}"));

    // single-row TD update and geometric decay
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut esn = init_esn(&params, &[12, 6], 7, 20, &mut rng).unwrap();
    let f: Vec<f64> = (0..esn.feature_len())
        .map(|k| ((k as f64) * 0.61).cos() * 0.4)
        .collect();
    let norm_sq: f64 = f.iter().map(|x| x * x).sum();
    let (action, r, rate) = (3usize, 1.7, 0.01);
    let before = esn.w_out.clone();
    let mut worst_td = 0.0f64;
    let e0 = r - esn.readout(&f, action);
    for k in 0..200 {
        let y = esn.readout(&f, action);
        let expected = e0 * (1.0 - rate * norm_sq).powi(k);
        worst_td = worst_td.max((r - y - expected).abs());
        esn.td_update(action, &f, r, y, rate).unwrap();
    }
    let untouched = (0..esn.n_actions())
        .filter(|&a| a != action)
        .all(|a| esn.w_out.row(a) == before.row(a));
    pass &= worst_td < 1e-9 && untouched;
    detail.push(format!(
        "TD recursion error {worst_td:.2e}, other rows untouched {untouched}"
    ));

    report(4, "ESN properties", pass, &detail.join("; "));
    assert!(pass);
}

// ---------------------------------------------------------------- 5, 7

fn oracle_world_config() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.area_width_m = 160.0;
    cfg.area_height_m = 160.0;
    cfg.bs_count = 2;
    cfg.ue_count = 4;
    cfg.power_levels = 1;
    cfg.nearest_bs_count = 1;
    cfg.fading = FadingMode::Unit;
    cfg.training_iterations = 2000;
    cfg.uav_missions = vec![MissionConfig {
        origin: Some(0),
        destination: Some(15),
        packet_rate: Some(0.5),
        ..MissionConfig::default()
    }];
    cfg
}

#[test]
fn c5_oracle_equivalence() {
    let t0 = Instant::now();
    let cfg = oracle_world_config();
    let mut hits = 0;
    let mut ratios = Vec::new();
    for seed in 0..20u64 {
        let world = build_world(&cfg, seed).unwrap();
        let best = exhaustive_best_return(&world, 8).unwrap();
        let trained = train(&cfg, seed, |_| build_world(&cfg, seed)).unwrap();
        let mut w = build_world(&cfg, seed).unwrap();
        let out = run_test(&mut w, &trained.models).unwrap();
        let ratio = out.returns[0] / best.discounted_return;
        hits += (ratio >= 0.95) as usize;
        ratios.push(ratio);
    }
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = hits >= 18;
    report(
        5,
        "oracle equivalence",
        pass,
        &format!(
            "{hits}/20 seeds at >= 95% of the exhaustive optimum (min ratio {min:.3}) in {:.0?}",
            t0.elapsed()
        ),
    );
    assert!(pass);
}

/// First block from which the curve stays at or below `level` for good.
/// Zero-initialized readouts start with a small error that grows while
/// bootstrapped values build up, so a plain first crossing would credit
/// that transient rather than convergence.
fn settle_time(curve: &[f64], level: f64) -> Option<usize> {
    match curve.iter().rposition(|&e| e > level) {
        None => Some(0),
        Some(k) if k + 1 < curve.len() => Some(k + 1),
        Some(_) => None,
    }
}

#[test]
fn c7_learning_rate_behavior() {
    let t0 = Instant::now();
    // long enough for lr=0.01 to flatten out too, so the tails are plateaus
    let mut base = oracle_world_config();
    base.training_iterations = 40_000;
    let seeds: Vec<u64> = (0..10).collect();
    let window = 20;
    let curves: Vec<Vec<f64>> = [0.0001, 0.01, 0.1]
        .iter()
        .map(|&lr| {
            let mut cfg = base.clone();
            cfg.learn_rate = lr;
            let per_seed: Vec<Vec<f64>> = seeds
                .iter()
                .map(|&s| train(&cfg, s, |_| build_world(&cfg, s)).unwrap().error_curve(window))
                .collect();
            (0..per_seed[0].len())
                .map(|k| per_seed.iter().map(|c| c[k]).sum::<f64>() / per_seed.len() as f64)
                .collect()
        })
        .collect();
    let (slow, mid, fast) = (&curves[0], &curves[1], &curves[2]);

    // error levels between the lowest and highest value any curve attains
    let lo = curves.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let hi = curves.iter().flatten().cloned().fold(0.0, f64::max);
    let mut slow_last = true;
    let mut levels = 0;
    for k in 1..50 {
        let level = lo + (hi - lo) * k as f64 / 50.0;
        let reach: Vec<Option<usize>> = curves.iter().map(|c| settle_time(c, level)).collect();
        if reach[1].is_none() && reach[2].is_none() {
            continue;
        }
        levels += 1;
        let others = reach[1..].iter().flatten().min().copied().unwrap();
        if reach[0].is_some_and(|t| t < others) {
            slow_last = false;
        }
    }
    let tail = |c: &[f64]| {
        let n = (c.len() / 5).max(1);
        c[c.len() - n..].iter().sum::<f64>() / n as f64
    };
    let (plateau_mid, plateau_fast) = (tail(mid), tail(fast));
    let pass = slow_last && plateau_fast >= plateau_mid;
    report(
        7,
        "learning-rate behavior",
        pass,
        &format!(
            "lr=1e-4 never settles first over {levels} levels: {slow_last}; plateau lr=0.1 {plateau_fast:.4} vs lr=0.01 {plateau_mid:.4} (lr=1e-4 ends at {:.4}) in {:.0?}",
            tail(slow),
            t0.elapsed()
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 6, 8

/// Training iterations per seed for the full-size runs, sized to the one
/// hour budget on a single core.
const FULL_ITERATIONS: usize = 3000;

fn table_config(uavs: usize) -> ScenarioConfig {
    let mut cfg = with_uav_count(&ScenarioConfig::default(), uavs);
    cfg.training_iterations = FULL_ITERATIONS;
    cfg
}

fn mean_of(runs: &[SeedRun], metric: &str) -> f64 {
    summarize(&metric_rows(runs, "")).get(metric).unwrap().mean
}

#[test]
fn c6_c8_baseline_comparison_and_constraints() {
    let t0 = Instant::now();
    let seeds: Vec<u64> = (0..20).collect();
    let episodes = 5;
    let mut pass6 = true;
    let mut lines6 = Vec::new();
    let mut structural_bad = 0usize;
    let mut trajectories = 0usize;
    let mut soft_violations = 0usize;
    let mut by_constraint: std::collections::BTreeMap<String, usize> = Default::default();
    let mut first_q = Vec::new();
    let mut last_q = Vec::new();

    for j in 1..=3 {
        let cfg = table_config(j);
        let trained = run_experiment(Scheme::Trained, &cfg, &seeds, episodes, None).unwrap();
        let baseline = run_experiment(Scheme::Baseline, &cfg, &seeds, episodes, None).unwrap();
        let (d_t, d_b) = (mean_of(&trained, "mean_delay_s"), mean_of(&baseline, "mean_delay_s"));
        let (r_t, r_b) = (
            mean_of(&trained, "mean_ue_rate_bps"),
            mean_of(&baseline, "mean_ue_rate_bps"),
        );
        let (s_t, s_b) = (mean_of(&trained, "mean_steps"), mean_of(&baseline, "mean_steps"));
        let ok = d_t < d_b && r_t > r_b && s_t <= 1.25 * s_b;
        pass6 &= ok;
        lines6.push(format!(
            "J={j} latency {:.3} vs {:.3} ms, UE rate {:.3} vs {:.3} Mbps, steps {s_t:.1} vs {s_b:.1}, arrived {:.2} ({})",
            d_t * 1e3,
            d_b * 1e3,
            r_t / 1e6,
            r_b / 1e6,
            mean_of(&trained, "arrived_fraction"),
            if ok { "ok" } else { "miss" }
        ));

        for run in trained.iter().chain(&baseline) {
            for (out, missions) in run.outcomes.iter().zip(&run.missions) {
                for (traj, mission) in out.trajectories.iter().zip(missions) {
                    let v = trajectory_valid(traj, mission, &run.grid, cfg.bs_count, cfg.sinr_threshold);
                    trajectories += 1;
                    structural_bad += (!v.structurally_valid()) as usize;
                    soft_violations += v.count(Constraint::SinrThreshold);
                    for x in v.violations.iter().filter(|x| x.constraint.is_structural()) {
                        *by_constraint.entry(format!("{:?}", x.constraint)).or_default() += 1;
                    }
                }
            }
        }
        for run in &trained {
            let stats = &run.training.as_ref().unwrap().stats;
            let q = stats.len() / 5;
            first_q.extend(stats[..q].iter().map(|s| s.mean_penalty));
            last_q.extend(stats[stats.len() - q..].iter().map(|s| s.mean_penalty));
        }
    }
    let elapsed = t0.elapsed();
    report(
        6,
        "trained vs shortest-path baseline",
        pass6,
        &format!("{} in {elapsed:.0?}", lines6.join("; ")),
    );

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (p_first, p_last) = (mean(&first_q), mean(&last_q));
    // with no penalty at all in the first quintile there is nothing to
    // decrease, so only a rise counts against it
    let decreasing = if p_first > 0.0 {
        p_last < p_first
    } else {
        p_last <= p_first
    };
    let pass8 = structural_bad == 0 && decreasing;
    report(
        8,
        "constraint suite",
        pass8,
        &format!(
            "{structural_bad}/{trajectories} trajectories with hard-constraint violations {by_constraint:?}; {soft_violations} SINR-threshold violations in test; training penalty first quintile {p_first:.3e} -> last {p_last:.3e}"
        ),
    );
    assert!(pass8, "criterion 8");
    assert!(pass6, "criterion 6");
}

// ---------------------------------------------------------------- 9

#[test]
fn c9_density_and_altitude_trends() {
    let t0 = Instant::now();
    let groups: Vec<Vec<u64>> = (0..5).map(|g| (0..4).map(|k| 100 + 4 * g + k).collect()).collect();
    let episodes = 3;
    let base = table_config(1);

    let sweep = |scheme: Scheme, configs: &[ScenarioConfig], seeds: &[u64]| -> Vec<(f64, f64)> {
        configs
            .iter()
            .map(|c| {
                let runs = run_experiment(scheme, c, seeds, episodes, None).unwrap();
                (mean_of(&runs, "mean_delay_s"), mean_of(&runs, "mean_ue_rate_bps"))
            })
            .collect()
    };
    let bs_cfgs: Vec<ScenarioConfig> = [10, 20, 30].iter().map(|&b| with_bs_count(&base, b)).collect();
    let alt_cfgs: Vec<ScenarioConfig> = [120.0, 180.0, 240.0].iter().map(|&h| with_altitude(&base, h)).collect();

    let dens_dir = |v: &[(f64, f64)]| v.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 <= w[0].1);
    let alt_dir = |v: &[(f64, f64)]| v.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
    let mut density_ok = 0;
    let mut altitude_ok = 0;
    // the same check on the fixed shortest-path policy, reported only, to
    // separate channel physics from learner variance
    let mut baseline_ok = (0, 0);
    let mut detail = Vec::new();
    for (g, seeds) in groups.iter().enumerate() {
        let d = sweep(Scheme::Trained, &bs_cfgs, seeds);
        let a = sweep(Scheme::Trained, &alt_cfgs, seeds);
        let dens = dens_dir(&d);
        let alt = alt_dir(&a);
        density_ok += dens as usize;
        altitude_ok += alt as usize;
        baseline_ok.0 += dens_dir(&sweep(Scheme::Baseline, &bs_cfgs, seeds)) as usize;
        baseline_ok.1 += alt_dir(&sweep(Scheme::Baseline, &alt_cfgs, seeds)) as usize;
        let fmt = |v: &[(f64, f64)]| {
            v.iter()
                .map(|(l, r)| format!("{:.3}ms/{:.3}Mbps", l * 1e3, r / 1e6))
                .collect::<Vec<_>>()
                .join(" ")
        };
        detail.push(format!(
            "group {g}: BS 10/20/30 [{}] {dens}, h 120/180/240 [{}] {alt}",
            fmt(&d),
            fmt(&a)
        ));
    }
    let pass = density_ok >= 4 && altitude_ok >= 4;
    report(
        9,
        "density and altitude trends",
        pass,
        &format!(
            "density {density_ok}/5 groups, altitude {altitude_ok}/5 groups (baseline policy: {}/5, {}/5) in {:.0?}; {}",
            baseline_ok.0,
            baseline_ok.1,
            t0.elapsed(),
            detail.join("; ")
        ),
    );
    assert!(pass);
}
