use rand::Rng;

use super::{
    assess, bs_interference, compute_reward, feasible_actions, greedy, init_models, select_action_train, ue_rates,
    AgentRuntime, Mode, StageRecord, UavStage, EXPLORE_STREAM,
};
use crate::deep_esn::{td_error, DeepEsn};
use crate::error::{Error, Result};
use crate::game::{apply_actions, observe, ActionSpace, Trajectory};
use crate::scenario::{rng_stream, ScenarioConfig, World};

/// Runs one stage: every live agent picks an action from the same pre-stage
/// world, all actions are applied together, fading is redrawn, then rewards
/// and (in training) readout updates are computed on the post-stage world.
///
/// With `capture` set the record also holds per-UE rates and per-BS
/// interference.
pub fn run_stage(
    world: &mut World,
    agents: &mut [AgentRuntime],
    mode: Mode,
    rng: &mut impl Rng,
    capture: bool,
) -> Result<StageRecord> {
    let live: Vec<usize> = (0..agents.len()).filter(|&i| !agents[i].done).collect();
    if live.is_empty() {
        return Err(Error::NoLiveAgents);
    }
    let cfg = world.config.clone();
    let space = ActionSpace::new(cfg.power_levels, cfg.nearest_bs_count);

    let mut chosen = Vec::with_capacity(live.len());
    for &i in &live {
        let ag = &agents[i];
        let values = ag.esn.readouts(&ag.features);
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                reward: f64::NAN,
                estimate: bad,
            });
        }
        let allowed = feasible_actions(world, ag.uav)?;
        let (a, p) = match mode {
            Mode::Train => select_action_train(&values, &allowed, cfg.epsilon, rng),
            Mode::Test => (greedy(&values, &allowed), 1.0),
        };
        chosen.push((i, a, p, values[a]));
    }
    let joint: f64 = chosen.iter().map(|c| c.2).product();
    let moves: Vec<_> = chosen
        .iter()
        .map(|&(i, a, _, _)| (agents[i].uav, space.action(a)))
        .collect();
    apply_actions(world, &moves)?;
    world.redraw_fading()?;
    world.stage += 1;

    let mut uavs: Vec<UavStage> = world
        .uavs
        .iter()
        .map(|u| UavStage {
            uav: u.id,
            cell: u.cell,
            arrived: u.done,
            ..UavStage::default()
        })
        .collect();
    for &(i, a, p, y) in &chosen {
        let ag = &mut agents[i];
        let (mut rec, _) = assess(world, ag.uav);
        let terminal = world.uavs[ag.uav].done;
        let (next_obs, next_features, next_best) = if terminal {
            (Vec::new(), Vec::new(), None)
        } else {
            let obs = observe(world, ag.uav)?.encode();
            let f = ag.esn.advance(&obs)?;
            let allowed = feasible_actions(world, ag.uav)?;
            let values = ag.esn.readouts(&f);
            let best = allowed.iter().map(|&b| values[b]).fold(f64::NEG_INFINITY, f64::max);
            (obs, f, Some(best))
        };
        let r = compute_reward(rec.utility, joint, cfg.discount, next_best, terminal)?;
        rec.td_error = match mode {
            Mode::Train => ag.esn.td_update(a, &ag.features, r, y, cfg.learn_rate)?,
            Mode::Test => td_error(r, y),
        };
        rec.observation = std::mem::replace(&mut ag.observation, next_obs);
        rec.action = Some(a);
        rec.prob = p;
        rec.reward = r;
        rec.readout = y;
        ag.features = next_features;
        ag.last_action = Some(a);
        ag.steps += 1;
        ag.done = terminal;
        uavs[ag.uav] = rec;
    }

    let (ue_rates_bps, bs_interference_w) = if capture {
        (ue_rates(world), bs_interference(world))
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(StageRecord {
        stage: world.stage,
        uavs,
        ue_rates_bps,
        bs_interference_w,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeOutcome {
    pub records: Vec<StageRecord>,
    pub trajectories: Vec<Trajectory>,
    /// Per-UAV discounted sum of stage utilities.
    pub returns: Vec<f64>,
    pub steps: Vec<usize>,
    pub arrived: Vec<bool>,
}

impl EpisodeOutcome {
    fn start(world: &World) -> Self {
        EpisodeOutcome {
            records: Vec::new(),
            trajectories: world
                .missions
                .iter()
                .map(|m| Trajectory::starting_at(m.origin))
                .collect(),
            returns: vec![0.0; world.uavs.len()],
            steps: vec![0; world.uavs.len()],
            arrived: world.uavs.iter().map(|u| u.done).collect(),
        }
    }

    pub(crate) fn absorb(&mut self, rec: StageRecord, discount: f64) {
        for s in rec.uavs.iter().filter(|s| s.active) {
            let j = s.uav;
            self.returns[j] += discount.powi(self.steps[j] as i32) * s.utility;
            self.steps[j] += 1;
            self.arrived[j] = s.arrived;
            self.trajectories[j].push(s.cell, s.serving_bs, s.power_w, s.sinr_sum);
        }
        self.records.push(rec);
    }

    fn mean_over_active(&self, f: impl Fn(&UavStage) -> f64) -> f64 {
        let vals: Vec<f64> = self
            .records
            .iter()
            .flat_map(|r| r.uavs.iter().filter(|s| s.active).map(&f))
            .collect();
        if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    }

    pub fn mean_td_error(&self) -> f64 {
        self.mean_over_active(|s| s.td_error)
    }

    pub fn mean_penalty(&self) -> f64 {
        self.mean_over_active(|s| s.penalty)
    }
}

/// Marks UAVs already sitting on their destination as done.
pub(crate) fn settle_arrivals(world: &mut World) {
    for (u, m) in world.uavs.iter_mut().zip(&world.missions) {
        if u.cell == m.destination {
            u.done = true;
        }
    }
}

/// Plays one episode until every UAV has arrived or the step cap is hit.
/// Reservoir states start from zero.
pub fn run_episode(
    world: &mut World,
    agents: &mut [AgentRuntime],
    mode: Mode,
    rng: &mut impl Rng,
    capture: bool,
) -> Result<EpisodeOutcome> {
    settle_arrivals(world);
    for ag in agents.iter_mut() {
        ag.esn.reset_states();
        ag.steps = 0;
        ag.last_action = None;
        ag.done = world.uav(ag.uav)?.done;
        ag.observation.clear();
        ag.features.clear();
        if !ag.done {
            ag.observation = observe(world, ag.uav)?.encode();
            ag.features = ag.esn.advance(&ag.observation)?;
        }
    }
    let mut out = EpisodeOutcome::start(world);
    let cap = world.config.episode_step_cap();
    let discount = world.config.discount;
    for _ in 0..cap {
        if agents.iter().all(|a| a.done) {
            break;
        }
        let rec = run_stage(world, agents, mode, rng, capture)?;
        out.absorb(rec, discount);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub mean_td_error: f64,
    pub mean_penalty: f64,
    pub mean_return: f64,
    pub mean_steps: f64,
    pub arrived_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub models: Vec<DeepEsn>,
    pub stats: Vec<IterationStats>,
}

impl TrainOutcome {
    /// Mean TD error per block of `window` iterations.
    pub fn error_curve(&self, window: usize) -> Vec<f64> {
        self.stats
            .chunks(window.max(1))
            .map(|c| c.iter().map(|s| s.mean_td_error).sum::<f64>() / c.len() as f64)
            .collect()
    }
}

/// Trains one network per UAV over `config.training_iterations` episodes.
/// `world_factory(i)` supplies the world for iteration `i`.
pub fn train(
    config: &ScenarioConfig,
    seed: u64,
    mut world_factory: impl FnMut(usize) -> Result<World>,
) -> Result<TrainOutcome> {
    let models = init_models(config, seed)?;
    continue_training(config, seed, models, config.training_iterations, &mut world_factory)
}

/// Trains existing models for `iterations` further episodes.
pub fn continue_training(
    config: &ScenarioConfig,
    seed: u64,
    models: Vec<DeepEsn>,
    iterations: usize,
    world_factory: &mut impl FnMut(usize) -> Result<World>,
) -> Result<TrainOutcome> {
    let mut agents: Vec<AgentRuntime> = models
        .into_iter()
        .enumerate()
        .map(|(j, esn)| AgentRuntime::new(j, esn))
        .collect();
    let mut rng = rng_stream(seed, EXPLORE_STREAM);
    let mut stats = Vec::with_capacity(iterations);
    for iteration in 0..iterations {
        let mut world = world_factory(iteration)?;
        let ep = run_episode(&mut world, &mut agents, Mode::Train, &mut rng, false).map_err(|e| match e {
            Error::NonFinite { .. } => Error::Diverged {
                iteration,
                learn_rate: config.learn_rate,
            },
            e => e,
        })?;
        let n = ep.steps.len().max(1) as f64;
        stats.push(IterationStats {
            iteration,
            mean_td_error: ep.mean_td_error(),
            mean_penalty: ep.mean_penalty(),
            mean_return: ep.returns.iter().sum::<f64>() / n,
            mean_steps: ep.steps.iter().sum::<usize>() as f64 / n,
            arrived_fraction: ep.arrived.iter().filter(|&&a| a).count() as f64 / n,
        });
    }
    Ok(TrainOutcome {
        models: agents.into_iter().map(|a| a.esn).collect(),
        stats,
    })
}

/// Greedy test episode with frozen readouts. Reservoir states still advance.
pub fn test(world: &mut World, models: &[DeepEsn]) -> Result<EpisodeOutcome> {
    if models.len() != world.uavs.len() {
        return Err(Error::Dimension {
            expected: world.uavs.len(),
            got: models.len(),
        });
    }
    let mut agents: Vec<AgentRuntime> = models
        .iter()
        .cloned()
        .enumerate()
        .map(|(j, esn)| AgentRuntime::new(j, esn))
        .collect();
    let mut rng = rng_stream(world.seed, EXPLORE_STREAM);
    run_episode(world, &mut agents, Mode::Test, &mut rng, true)
}
