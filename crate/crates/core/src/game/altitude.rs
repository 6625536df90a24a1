//! Analytic altitude bounds. The upper bound is the altitude at which the
//! summed SINR at the serving BS just meets its threshold; the lower bound is
//! the altitude below which the UAV's interference at some neighboring BS
//! exceeds its cap. Both follow from inverting free-space loss.

use std::f64::consts::PI;

use crate::channel::interference_at_bs;
use crate::error::Result;
use crate::scenario::{Device, World};
use crate::units::SPEED_OF_LIGHT_M_S;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AltitudeBounds {
    pub h_min_m: f64,
    pub h_max_m: f64,
    pub chi_m: f64,
}

/// `(4π f / c)²`: free-space attenuation at 1 m.
pub fn free_space_factor(carrier_hz: f64) -> f64 {
    let k = 4.0 * PI * carrier_hz / SPEED_OF_LIGHT_M_S;
    k * k
}

fn radical(radicand: f64) -> f64 {
    if radicand > 0.0 {
        radicand.sqrt()
    } else {
        0.0
    }
}

/// Link inputs for the upper bound, one entry per RB of the UAV.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundInputs {
    pub power_w: f64,
    pub fading: Vec<f64>,
    pub interference_w: Vec<f64>,
    pub noise_w: f64,
    pub sinr_threshold: f64,
    pub carrier_hz: f64,
    /// Squared horizontal distance to the serving BS.
    pub offset_sq_m2: f64,
}

/// Unclamped upper altitude; zero when the radicand is negative.
pub fn upper_altitude_raw(inp: &UpperBoundInputs) -> f64 {
    let rbs = inp.fading.len() as f64;
    if rbs == 0.0 {
        return 0.0;
    }
    let per_rb: f64 = inp
        .fading
        .iter()
        .zip(&inp.interference_w)
        .map(|(g, i)| g / (i + inp.noise_w))
        .sum();
    let d_sq = inp.power_w / (rbs * inp.sinr_threshold * free_space_factor(inp.carrier_hz)) * per_rb;
    radical(d_sq - inp.offset_sq_m2)
}

/// Unclamped lower altitude with respect to one neighboring BS.
///
/// `fading_sum` is the UAV's summed fading gain to that BS over its
/// `rb_count` RBs and `cap_sum_w` the summed interference cap over the same
/// RBs.
pub fn lower_altitude_raw(
    power_w: f64,
    rb_count: usize,
    fading_sum: f64,
    cap_sum_w: f64,
    carrier_hz: f64,
    offset_sq_m2: f64,
) -> f64 {
    if rb_count == 0 {
        return 0.0;
    }
    let d_sq = power_w * fading_sum / (rb_count as f64 * free_space_factor(carrier_hz) * cap_sum_w);
    radical(d_sq - offset_sq_m2)
}

fn fading_to(world: &World, uav: usize, bs: usize) -> Vec<f64> {
    (0..world.uavs[uav].rbs.len())
        .map(|slot| world.fading.gain(Device::Uav(uav), bs, slot))
        .collect()
}

pub fn altitude_upper(world: &World, uav: usize) -> Result<f64> {
    let chi = world.config.min_altitude_m;
    let u = world.uav(uav)?;
    let Some(s) = u.serving_bs.filter(|_| u.is_transmitting()) else {
        return Ok(chi);
    };
    let here = world.grid.cell_center(u.cell)?;
    let inp = UpperBoundInputs {
        power_w: u.power_w,
        fading: fading_to(world, uav, s),
        interference_w: u
            .rbs
            .iter()
            .map(|&rb| interference_at_bs(world, s, rb, Some(Device::Uav(uav))))
            .collect(),
        noise_w: world.config.noise_per_rb_w(),
        sinr_threshold: world.config.sinr_threshold,
        carrier_hz: world.config.carrier_hz,
        offset_sq_m2: here.distance_sq(world.base_stations[s].position),
    };
    Ok(upper_altitude_raw(&inp).max(chi))
}

pub fn altitude_lower(world: &World, uav: usize) -> Result<f64> {
    let chi = world.config.min_altitude_m;
    let u = world.uav(uav)?;
    let Some(s) = u.serving_bs.filter(|_| u.is_transmitting()) else {
        return Ok(chi);
    };
    let here = world.grid.cell_center(u.cell)?;
    let cap_sum = world.config.interference_cap_w * u.rbs.len() as f64;
    let worst = world
        .base_stations
        .iter()
        .filter(|b| b.id != s)
        .map(|b| {
            let g: f64 = fading_to(world, uav, b.id).iter().sum();
            lower_altitude_raw(
                u.power_w,
                u.rbs.len(),
                g,
                cap_sum,
                world.config.carrier_hz,
                here.distance_sq(b.position),
            )
        })
        .fold(0.0, f64::max);
    Ok(worst.max(chi))
}

pub fn altitude_bounds(world: &World, uav: usize) -> Result<AltitudeBounds> {
    Ok(AltitudeBounds {
        h_min_m: altitude_lower(world, uav)?,
        h_max_m: altitude_upper(world, uav)?,
        chi_m: world.config.min_altitude_m,
    })
}

/// Received power ratio implied by the bound: the SINR sum at altitude `h`
/// computed from first principles, for cross-checking the inversion.
#[cfg(test)]
fn sinr_sum_at(inp: &UpperBoundInputs, h: f64) -> f64 {
    let d_sq = inp.offset_sq_m2 + h * h;
    let rbs = inp.fading.len() as f64;
    inp.fading
        .iter()
        .zip(&inp.interference_w)
        .map(|(g, i)| inp.power_w / rbs * g / (free_space_factor(inp.carrier_hz) * d_sq) / (i + inp.noise_w))
        .sum()
}
