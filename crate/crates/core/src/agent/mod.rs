//! Multi-agent training and greedy testing: epsilon-greedy selection, the
//! simultaneous-action stage barrier, rewards and readout updates.

mod episode;

pub(crate) use episode::settle_arrivals;
pub use episode::{
    continue_training, run_episode, run_stage, test, train, EpisodeOutcome, IterationStats, TrainOutcome,
};

use rand::Rng;

use crate::channel::{interference_at_bs, uav_link_report, ue_rate_bps};
use crate::deep_esn::{init_esn, DeepEsn};
use crate::error::{Error, Result};
use crate::game::{feasible_moves, utility, ActionSpace, PhiTerms};
use crate::scenario::{Device, ScenarioConfig, World};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Test,
}

/// One UAV's learner plus its per-episode bookkeeping.
#[derive(Clone, Debug)]
pub struct AgentRuntime {
    pub uav: usize,
    pub esn: DeepEsn,
    /// Encoded observation of the current stage.
    pub observation: Vec<f64>,
    /// Readout features for the current stage.
    pub features: Vec<f64>,
    pub last_action: Option<usize>,
    pub done: bool,
    pub steps: usize,
}

impl AgentRuntime {
    pub fn new(uav: usize, esn: DeepEsn) -> Self {
        AgentRuntime {
            uav,
            esn,
            observation: Vec::new(),
            features: Vec::new(),
            last_action: None,
            done: false,
            steps: 0,
        }
    }
}

/// Input length of the per-UAV observation vector.
pub fn input_len(config: &ScenarioConfig) -> usize {
    2 * config.nearest_bs_count + 1 + 2 * config.uav_count()
}

/// Fresh networks for every UAV, each from its own seed stream.
pub fn init_models(config: &ScenarioConfig, seed: u64) -> Result<Vec<DeepEsn>> {
    let j = config.uav_count();
    let sizes = config.esn.sizes_for(j);
    (0..j)
        .map(|u| {
            let mut rng = crate::scenario::rng_stream(seed, ESN_STREAM + u as u64);
            init_esn(&config.esn, &sizes, input_len(config), config.action_count(), &mut rng)
        })
        .collect()
}

pub(crate) const ESN_STREAM: u64 = 0x100;
pub(crate) const EXPLORE_STREAM: u64 = 0x200;

/// Action indices whose move is feasible from the UAV's current cell.
pub fn feasible_actions(world: &World, uav: usize) -> Result<Vec<usize>> {
    let moves = feasible_moves(world, uav)?;
    let space = ActionSpace::new(world.config.power_levels, world.config.nearest_bs_count);
    let per_move = space.len() / moves.len();
    Ok((0..space.len()).filter(|&i| moves[i / per_move]).collect())
}

/// Lowest-index argmax of `values` over `allowed`.
pub fn greedy(values: &[f64], allowed: &[usize]) -> usize {
    let mut best = allowed[0];
    for &a in &allowed[1..] {
        if values[a] > values[best] {
            best = a;
        }
    }
    best
}

/// Probability the epsilon-greedy policy assigns to `action` when `best` is
/// the argmax among `n` candidates.
pub fn strategy_prob(action: usize, best: usize, n: usize, epsilon: f64) -> f64 {
    let base = epsilon / n as f64;
    if action == best {
        1.0 - epsilon + base
    } else {
        base
    }
}

/// Epsilon-greedy choice over `allowed`. Returns the action and its
/// probability under the policy.
pub fn select_action_train(values: &[f64], allowed: &[usize], epsilon: f64, rng: &mut impl Rng) -> (usize, f64) {
    let best = greedy(values, allowed);
    let a = if rng.random::<f64>() < epsilon {
        allowed[rng.random_range(0..allowed.len())]
    } else {
        best
    };
    (a, strategy_prob(a, best, allowed.len(), epsilon))
}

/// `u * joint_prob`, plus the discounted best next readout unless terminal.
pub fn compute_reward(u: f64, joint_prob: f64, discount: f64, next_best: Option<f64>, terminal: bool) -> Result<f64> {
    let expected = u * joint_prob;
    if terminal {
        return Ok(expected);
    }
    let next = next_best.ok_or(Error::MissingNextFeatures)?;
    Ok(expected + discount * next)
}

/// One UAV's entry in a stage record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UavStage {
    pub uav: usize,
    /// False once the UAV has arrived (or never left its destination).
    pub active: bool,
    pub observation: Vec<f64>,
    pub action: Option<usize>,
    pub prob: f64,
    pub utility: f64,
    pub reward: f64,
    pub readout: f64,
    pub td_error: f64,
    pub cell: usize,
    pub serving_bs: Option<usize>,
    pub power_w: f64,
    pub rate_bps: f64,
    pub delay_s: f64,
    pub sinr_sum: f64,
    pub penalty: f64,
    pub caused_interference_w: f64,
    pub arrived: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageRecord {
    pub stage: usize,
    pub uavs: Vec<UavStage>,
    /// Empty unless the stage was captured in detail.
    pub ue_rates_bps: Vec<f64>,
    /// Mean interference over each BS's occupied RBs; empty unless captured.
    pub bs_interference_w: Vec<f64>,
}

/// Radio outcome and utility of a UAV's latest move on the post-barrier world.
pub(crate) fn assess(world: &World, uav: usize) -> (UavStage, PhiTerms) {
    let report = uav_link_report(world, uav);
    let cfg = &world.config;
    let terms = PhiTerms {
        interference_w: report.caused_interference_w,
        delay_s: report.delay_or(cfg.saturation_delay_s),
        sinr_sum: report.sinr_sum(),
    };
    let u = &world.uavs[uav];
    let here = world.grid.cell_center(u.cell).expect("valid cell");
    let dest = world.destination_center(uav).expect("valid mission");
    let phi = terms.phi(&cfg.weights, cfg.sinr_threshold);
    let stage = UavStage {
        uav,
        active: true,
        utility: utility(phi, u.prev_dist_m, here.distance(dest), cfg.weights.progress_bonus),
        cell: u.cell,
        serving_bs: u.serving_bs,
        power_w: u.power_w,
        rate_bps: report.rate_bps,
        delay_s: terms.delay_s,
        sinr_sum: terms.sinr_sum,
        penalty: terms.penalty(&cfg.weights, cfg.sinr_threshold),
        caused_interference_w: terms.interference_w,
        arrived: u.done,
        ..UavStage::default()
    };
    (stage, terms)
}

pub(crate) fn ue_rates(world: &World) -> Vec<f64> {
    (0..world.ues.len()).map(|i| ue_rate_bps(world, i)).collect()
}

pub(crate) fn bs_interference(world: &World) -> Vec<f64> {
    world
        .base_stations
        .iter()
        .map(|bs| {
            let held: Vec<(usize, Device)> = bs
                .rb_map
                .iter()
                .enumerate()
                .filter_map(|(rb, d)| d.map(|d| (rb, d)))
                .collect();
            if held.is_empty() {
                return 0.0;
            }
            let total: f64 = held
                .iter()
                .map(|&(rb, d)| interference_at_bs(world, bs.id, rb, Some(d)))
                .sum();
            total / held.len() as f64
        })
        .collect()
}
