//! Brute-force reference computations. Nothing here calls into the channel,
//! game or agent code; everything is re-derived from the raw world data.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::{AltitudeMode, FadingMode, World};

pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Free-space attenuation as a linear factor, from the published dB form
/// with its rounded -147.55 dB constant.
fn free_space_gain(d: f64, f: f64) -> f64 {
    10f64.powf(-(20.0 * (d * f).log10() - 147.55) / 10.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    /// Action indices in the learner's ordering (move-major, power, assoc).
    pub actions: Vec<usize>,
    pub cells: Vec<usize>,
    pub discounted_return: f64,
    pub horizon: usize,
}

struct Flat {
    cols: usize,
    rows: usize,
    step: f64,
    bs: Vec<(f64, f64)>,
    ue_pos: Vec<(f64, f64)>,
    ue_bs: Vec<usize>,
    /// UE ids per BS, ascending.
    ue_of_bs: Vec<Vec<usize>>,
}

impl Flat {
    fn center(&self, cell: usize) -> (f64, f64) {
        let (c, r) = (cell % self.cols, cell / self.cols);
        ((c as f64 + 0.5) * self.step, (r as f64 + 0.5) * self.step)
    }
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn neighbour(f: &Flat, cell: usize, mv: usize) -> usize {
    let (c, r) = (cell % f.cols, cell / f.cols);
    let (c, r) = match mv {
        0 if c > 0 => (c - 1, r),
        1 if c + 1 < f.cols => (c + 1, r),
        2 if r + 1 < f.rows => (c, r + 1),
        3 if r > 0 => (c, r - 1),
        _ => (c, r),
    };
    r * f.cols + c
}

/// Utility of one move for the world's only UAV, with unit fading.
struct Evaluator<'a> {
    w: &'a World,
    f: Flat,
}

impl Evaluator<'_> {
    fn utility(&self, from: usize, to: usize, level: usize, assoc: usize) -> f64 {
        let cfg = &self.w.config;
        let m = &self.w.missions[0];
        let here = self.f.center(to);
        let mut order: Vec<usize> = (0..self.f.bs.len()).collect();
        order.sort_by(|&a, &b| {
            dist2(here, self.f.bs[a])
                .partial_cmp(&dist2(here, self.f.bs[b]))
                .unwrap()
                .then(a.cmp(&b))
        });
        let s = order[assoc - 1];
        let p = level as f64 * m.max_power_w / cfg.power_levels as f64;
        let c_uav = cfg.rbs_per_uav;
        let p_rb = p / c_uav as f64;
        let h = m.altitude_m;
        let fspl = |bs: (f64, f64)| {
            let d = (dist2(here, bs).powi(2) + h * h).sqrt();
            free_space_gain(d, cfg.carrier_hz)
        };
        let first_rb = self.f.ue_of_bs[s].len() * cfg.rbs_per_ue;
        let noise = cfg.noise_psd_w_per_hz * cfg.rb_bandwidth_hz;
        let ue_p_rb = cfg.ue_tx_power_w / cfg.rbs_per_ue as f64;
        let mut rate = 0.0;
        let mut sinr_sum = 0.0;
        for rb in first_rb..first_rb + c_uav {
            let mut interference = 0.0;
            for (q, &r) in self.f.ue_bs.iter().enumerate() {
                if r == s {
                    continue;
                }
                let k = self.f.ue_of_bs[r].iter().position(|&x| x == q).unwrap();
                if rb >= k * cfg.rbs_per_ue && rb < (k + 1) * cfg.rbs_per_ue {
                    let d = dist2(self.f.ue_pos[q], self.f.bs[s]).max(1.0);
                    let pl_db = 15.3 + 37.6 * d.log10();
                    interference += ue_p_rb * 10f64.powf(-pl_db / 10.0);
                }
            }
            let g = p_rb * fspl(self.f.bs[s]) / (interference + noise);
            sinr_sum += g;
            rate += cfg.rb_bandwidth_hz * (1.0 + g).log2();
        }
        let mu = rate / m.packet_size_bits;
        let lam = m.packet_rate;
        let delay = if mu > lam {
            (lam / (2.0 * mu * (mu - lam)) + 1.0 / mu).min(cfg.saturation_delay_s)
        } else {
            cfg.saturation_delay_s
        };
        let caused: f64 = (0..self.f.bs.len())
            .filter(|&r| r != s)
            .map(|r| c_uav as f64 * p_rb * fspl(self.f.bs[r]))
            .sum();
        let short = (sinr_sum - cfg.sinr_threshold).min(0.0);
        let wts = &cfg.weights;
        let phi = -wts.interference * caused - wts.delay * delay - wts.sinr_penalty * short * short;
        let dest = self.f.center(m.destination);
        let before = dist2(self.f.center(from), dest);
        let after = dist2(here, dest);
        if after < before {
            phi + wts.progress_bonus
        } else if after > before {
            phi - wts.progress_bonus
        } else {
            phi
        }
    }
}

#[derive(Clone, Debug)]
struct Best {
    value: f64,
    actions: Vec<usize>,
}

fn better(a: &Best, b: &Best) -> bool {
    a.value > b.value || (a.value == b.value && a.actions < b.actions)
}

fn search(
    ev: &Evaluator,
    cell: usize,
    visited: &mut Vec<usize>,
    depth: usize,
    horizon: usize,
    acc: f64,
    seq: &mut Vec<usize>,
    best: &mut Best,
) {
    let cfg = &ev.w.config;
    let dest = ev.w.missions[0].destination;
    if depth == horizon || (depth > 0 && cell == dest) {
        let cand = Best {
            value: acc,
            actions: seq.clone(),
        };
        if better(&cand, best) {
            *best = cand;
        }
        return;
    }
    let (o, l) = (cfg.power_levels, cfg.nearest_bs_count);
    let discount = cfg.discount.powi(depth as i32);
    for a in 0..5 * o * l {
        let mv = a / (o * l);
        let level = (a / l) % o + 1;
        let assoc = a % l + 1;
        let next = neighbour(&ev.f, cell, mv);
        if next != cell && visited.contains(&next) {
            continue;
        }
        let u = ev.utility(cell, next, level, assoc);
        seq.push(a);
        let fresh = next != cell;
        if fresh {
            visited.push(next);
        }
        search(ev, next, visited, depth + 1, horizon, acc + discount * u, seq, best);
        if fresh {
            visited.pop();
        }
        seq.pop();
    }
}

/// Best discounted return over every action sequence of length up to
/// `horizon` for a single-UAV world with unit fading. The episode ends at
/// arrival. Cells are never re-entered.
pub fn exhaustive_best_return(world: &World, horizon: usize) -> Result<OracleResult> {
    let cfg = &world.config;
    if world.uavs.len() != 1 {
        return Err(Error::Config("exhaustive search needs exactly one UAV".into()));
    }
    if cfg.fading != FadingMode::Unit || cfg.altitude_mode != AltitudeMode::Fixed {
        return Err(Error::Config(
            "exhaustive search needs unit fading and fixed altitude".into(),
        ));
    }
    let z = 5 * cfg.power_levels * cfg.nearest_bs_count;
    let total = (z as u64).checked_pow(horizon as u32);
    if total.is_none_or(|t| t > ENUMERATION_LIMIT) {
        return Err(Error::EnumerationTooLarge {
            actions: z,
            horizon,
            limit: ENUMERATION_LIMIT,
        });
    }
    let cols = (cfg.area_width_m / cfg.grid_step_m).round() as usize;
    let rows = (cfg.area_height_m / cfg.grid_step_m).round() as usize;
    let mut ue_of_bs = vec![Vec::new(); world.base_stations.len()];
    for (q, ue) in world.ues.iter().enumerate() {
        ue_of_bs[ue.serving_bs].push(q);
    }
    let f = Flat {
        cols,
        rows,
        step: cfg.grid_step_m,
        bs: world
            .base_stations
            .iter()
            .map(|b| (b.position.x, b.position.y))
            .collect(),
        ue_pos: world.ues.iter().map(|u| (u.position.x, u.position.y)).collect(),
        ue_bs: world.ues.iter().map(|u| u.serving_bs).collect(),
        ue_of_bs,
    };
    let ev = Evaluator { w: world, f };
    let origin = world.missions[0].origin;
    let seed = Best {
        value: f64::NEG_INFINITY,
        actions: Vec::new(),
    };
    let best = if horizon == 0 || origin == world.missions[0].destination {
        Best {
            value: 0.0,
            actions: Vec::new(),
        }
    } else {
        (0..z)
            .into_par_iter()
            .map(|first| {
                let (o, l) = (cfg.power_levels, cfg.nearest_bs_count);
                let next = neighbour(&ev.f, origin, first / (o * l));
                let u = ev.utility(origin, next, (first / l) % o + 1, first % l + 1);
                let mut visited = vec![origin];
                if next != origin {
                    visited.push(next);
                }
                let mut seq = vec![first];
                let mut best = seed.clone();
                search(&ev, next, &mut visited, 1, horizon, u, &mut seq, &mut best);
                best
            })
            .reduce(|| seed.clone(), |a, b| if better(&b, &a) { b } else { a })
    };
    let (o, l) = (cfg.power_levels, cfg.nearest_bs_count);
    let mut cells = vec![origin];
    for &a in &best.actions {
        let c = *cells.last().unwrap();
        cells.push(neighbour(&ev.f, c, a / (o * l)));
    }
    Ok(OracleResult {
        actions: best.actions,
        cells,
        discounted_return: best.value,
        horizon,
    })
}

/// Mean sojourn time of an M/D/1 queue by Lindley recursion over
/// `n_packets` Poisson arrivals with deterministic service `1/mu`.
pub fn mdd1_sim(lambda: f64, mu: f64, n_packets: usize, rng: &mut impl Rng) -> Result<f64> {
    if !(lambda > 0.0 && mu > lambda) {
        return Err(Error::UnstableQueue { lambda, mu });
    }
    if n_packets < 100_000 {
        return Err(Error::Config(format!("need at least 1e5 packets, got {n_packets}")));
    }
    let service = 1.0 / mu;
    let mut wait = 0.0f64;
    let mut total = 0.0;
    for _ in 0..n_packets {
        total += wait + service;
        let gap = -(1.0 - rng.random::<f64>()).ln() / lambda;
        wait = (wait + service - gap).max(0.0);
    }
    Ok(total / n_packets as f64)
}

pub const BRUTE_FORCE_DEVICE_LIMIT: usize = 20;

/// Interference power at `bs` on resource block `rb`, by a direct loop over
/// every device.
pub fn brute_force_interference(world: &World, bs: usize, rb: usize) -> Result<f64> {
    let devices = world.ues.len() + world.uavs.len();
    if devices > BRUTE_FORCE_DEVICE_LIMIT {
        return Err(Error::Config(format!(
            "brute force limited to {BRUTE_FORCE_DEVICE_LIMIT} devices, world has {devices}"
        )));
    }
    let target = world.base_stations[bs].position;
    let t = (target.x, target.y);
    let mut total = 0.0;
    for ue in &world.ues {
        if ue.serving_bs == bs {
            continue;
        }
        if let Some(slot) = ue.rbs.iter().position(|&c| c == rb) {
            let d = dist2((ue.position.x, ue.position.y), t).max(1.0);
            let loss = 10f64.powf(-(15.3 + 37.6 * d.log10()) / 10.0);
            let p = ue.tx_power_w / ue.rbs.len() as f64;
            total += p * loss * world.fading.gain(crate::scenario::Device::Ue(ue.id), bs, slot);
        }
    }
    for u in &world.uavs {
        let Some(s) = u.serving_bs else { continue };
        if s == bs || u.power_w <= 0.0 {
            continue;
        }
        if let Some(slot) = u.rbs.iter().position(|&c| c == rb) {
            let step = world.config.grid_step_m;
            let cols = world.grid.cols();
            let here = (
                ((u.cell % cols) as f64 + 0.5) * step,
                ((u.cell / cols) as f64 + 0.5) * step,
            );
            let d = (dist2(here, t).powi(2) + u.altitude_m * u.altitude_m).sqrt();
            let p = u.power_w / u.rbs.len() as f64;
            total += p
                * free_space_gain(d, world.config.carrier_hz)
                * world.fading.gain(crate::scenario::Device::Uav(u.id), bs, slot);
        }
    }
    Ok(total)
}
