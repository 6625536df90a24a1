use std::f64::consts::PI;

use crate::error::Result;
use crate::scenario::{Point, World};

/// Orientation from `from` to `to` in the xy-plane, in `[-π, π)`.
pub fn orientation(from: Point, to: Point) -> f64 {
    let theta = (to.y - from.y).atan2(to.x - from.x);
    if theta >= PI {
        theta - 2.0 * PI
    } else {
        theta
    }
}

pub fn orientation_bin(theta: f64, bins: usize) -> usize {
    let width = 2.0 * PI / bins as f64;
    (((theta + PI) / width).floor() as usize).min(bins - 1)
}

pub fn distance_bin(d_m: f64, width_m: f64, bins: usize) -> usize {
    ((d_m / width_m).floor() as usize).min(bins - 1)
}

/// Discretized network state seen by one UAV.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Observation {
    /// (distance bin, orientation bin) for each of the nearest BSs, nearest first.
    pub bs_bins: Vec<(usize, usize)>,
    pub dest_orientation_bin: usize,
    /// (column, row) of every UAV, in id order.
    pub uav_cells: Vec<(usize, usize)>,
    pub distance_bins: usize,
    pub orientation_bins: usize,
    pub cols: usize,
    pub rows: usize,
}

impl Observation {
    pub fn len(&self) -> usize {
        2 * self.bs_bins.len() + 1 + 2 * self.uav_cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Numeric input vector: every bin or coordinate index mapped to the
    /// center of its slot in `(0, 1)`.
    pub fn encode(&self) -> Vec<f64> {
        let scale = |i: usize, n: usize| (i as f64 + 0.5) / n as f64;
        let mut v = Vec::with_capacity(self.len());
        for &(d, o) in &self.bs_bins {
            v.push(scale(d, self.distance_bins));
            v.push(scale(o, self.orientation_bins));
        }
        v.push(scale(self.dest_orientation_bin, self.orientation_bins));
        for &(c, r) in &self.uav_cells {
            v.push(scale(c, self.cols));
            v.push(scale(r, self.rows));
        }
        v
    }
}

pub fn distance_bin_count(world: &World) -> usize {
    (world.grid.diagonal_m() / world.config.distance_bin_m).ceil().max(1.0) as usize
}

pub fn observe(world: &World, uav: usize) -> Result<Observation> {
    let cfg = &world.config;
    let u = world.uav(uav)?;
    let here = world.grid.cell_center(u.cell)?;
    let dist_bins = distance_bin_count(world);
    let bs_bins = world
        .nearest_bs_list(here, cfg.nearest_bs_count)
        .into_iter()
        .map(|b| {
            let p = world.base_stations[b].position;
            let d = (here.distance_sq(p) + u.altitude_m * u.altitude_m).sqrt();
            (
                distance_bin(d, cfg.distance_bin_m, dist_bins),
                orientation_bin(orientation(here, p), cfg.orientation_bins),
            )
        })
        .collect();
    let dest = world.destination_center(uav)?;
    let dest_orientation_bin = if u.cell == world.missions[uav].destination {
        0
    } else {
        orientation_bin(orientation(here, dest), cfg.orientation_bins)
    };
    let uav_cells = world
        .uavs
        .iter()
        .map(|o| world.grid.pos(o.cell).map(|p| (p.col, p.row)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Observation {
        bs_bins,
        dest_orientation_bin,
        uav_cells,
        distance_bins: dist_bins,
        orientation_bins: cfg.orientation_bins,
        cols: world.grid.cols(),
        rows: world.grid.rows(),
    })
}
