//! Shortest-path comparison scheme: greedy Manhattan moves, fixed power and
//! nearest-BS association.

use crate::agent::{assess, bs_interference, settle_arrivals, ue_rates, EpisodeOutcome, StageRecord, UavStage};
use crate::error::{Error, Result};
use crate::game::{apply_actions, Action, Move};
use crate::scenario::{Grid, World};

/// One greedy Manhattan step from `cell` toward `dest`: close the larger of
/// the column and row gaps first, columns on ties.
pub fn shortest_path_move(grid: &Grid, cell: usize, dest: usize) -> Result<Move> {
    let a = grid.pos(cell)?;
    let b = grid.pos(dest)?;
    let dx = b.col as i64 - a.col as i64;
    let dy = b.row as i64 - a.row as i64;
    Ok(if dx == 0 && dy == 0 {
        Move::Stay
    } else if dx.abs() >= dy.abs() {
        if dx > 0 {
            Move::Right
        } else {
            Move::Left
        }
    } else if dy > 0 {
        Move::Forward
    } else {
        Move::Backward
    })
}

pub fn shortest_path_policy(world: &World, uav: usize) -> Result<Action> {
    let u = world.uav(uav)?;
    let cfg = &world.config;
    Ok(Action {
        movement: shortest_path_move(&world.grid, u.cell, world.missions[uav].destination)?,
        power_level: cfg.baseline.power_level.unwrap_or(cfg.power_levels),
        assoc: cfg.baseline.assoc_rank,
    })
}

/// Plays one episode with every UAV following the shortest-path policy.
pub fn run_baseline_episode(world: &mut World) -> Result<EpisodeOutcome> {
    settle_arrivals(world);
    let cap = world.config.episode_step_cap();
    let discount = world.config.discount;
    let mut out = EpisodeOutcome::default();
    out.trajectories = world
        .missions
        .iter()
        .map(|m| crate::game::Trajectory::starting_at(m.origin))
        .collect();
    out.returns = vec![0.0; world.uavs.len()];
    out.steps = vec![0; world.uavs.len()];
    out.arrived = world.uavs.iter().map(|u| u.done).collect();
    for _ in 0..cap {
        let live: Vec<usize> = world.live_uavs().map(|u| u.id).collect();
        if live.is_empty() {
            break;
        }
        let actions = live
            .iter()
            .map(|&j| Ok((j, shortest_path_policy(world, j)?)))
            .collect::<Result<Vec<_>>>()?;
        apply_actions(world, &actions)?;
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
        for &j in &live {
            let (mut rec, _) = assess(world, j);
            rec.reward = rec.utility;
            rec.prob = 1.0;
            uavs[j] = rec;
        }
        out.absorb(
            StageRecord {
                stage: world.stage,
                uavs,
                ue_rates_bps: ue_rates(world),
                bs_interference_w: bs_interference(world),
            },
            discount,
        );
    }
    if out.trajectories.len() != world.uavs.len() {
        return Err(Error::UnknownUav(out.trajectories.len()));
    }
    Ok(out)
}
