use super::action::{Action, Move};
use super::altitude::altitude_bounds;
use crate::error::{Error, Result};
use crate::scenario::{AltitudeMode, World};

/// Applies one UAV's action. See [`apply_actions`].
pub fn apply_action(world: &mut World, uav: usize, action: Action) -> Result<()> {
    apply_actions(world, &[(uav, action)])
}

/// Applies all UAVs' simultaneously chosen actions at the stage barrier:
/// moves one grid step (off-grid moves stay put), sets power and serving BS,
/// then re-allocates RBs at the new serving BSs.
///
/// UAVs that arrived in an earlier stage are silenced first when
/// `silence_on_arrival` is set.
pub fn apply_actions(world: &mut World, actions: &[(usize, Action)]) -> Result<()> {
    for &(j, _) in actions {
        let u = world.uav(j)?;
        if u.done {
            return Err(Error::UavDone(j));
        }
    }
    if world.config.silence_on_arrival {
        for u in world.uavs.iter_mut().filter(|u| u.done) {
            u.silence();
        }
    }
    let levels = world.config.power_levels;
    let nearest = world.config.nearest_bs_count;
    for &(j, a) in actions {
        if a.power_level == 0 || a.power_level > levels || a.assoc == 0 || a.assoc > nearest {
            return Err(Error::Config(format!("action {a:?} outside the action space")));
        }
        let dest = world.missions[j].destination;
        let here = world.grid.cell_center(world.uavs[j].cell)?;
        let dest_c = world.grid.cell_center(dest)?;
        let next = a.movement.apply(&world.grid, world.uavs[j].cell);
        let next_c = world.grid.cell_center(next)?;
        let serving = world.nearest_bs_list(next_c, nearest)[a.assoc - 1];
        let max_power = world.missions[j].max_power_w;
        let u = &mut world.uavs[j];
        u.prev_dist_m = here.distance(dest_c);
        u.cell = next;
        u.path.push(next);
        u.power_level = a.power_level;
        u.power_w = a.power_level as f64 * max_power / levels as f64;
        u.serving_bs = Some(serving);
        u.done = next == dest;
    }
    world.reallocate_rbs()?;
    if world.config.altitude_mode == AltitudeMode::ClampToBounds {
        for &(j, _) in actions {
            let b = altitude_bounds(world, j)?;
            let u = &mut world.uavs[j];
            if b.h_min_m <= b.h_max_m {
                u.altitude_m = u.altitude_m.clamp(b.h_min_m, b.h_max_m);
            }
        }
    }
    Ok(())
}

/// Per-action feasibility for a UAV: moves into a cell it already left are
/// excluded (each cell is visited at most once); hovering and off-grid moves,
/// which resolve to hovering, stay feasible.
pub fn feasible_moves(world: &World, uav: usize) -> Result<[bool; 5]> {
    let u = world.uav(uav)?;
    let mut out = [true; 5];
    for (slot, m) in Move::ALL.iter().enumerate() {
        let next = m.apply(&world.grid, u.cell);
        out[slot] = next == u.cell || !u.path.contains(&next);
    }
    Ok(out)
}
