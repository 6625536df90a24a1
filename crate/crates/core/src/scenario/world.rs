use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{FadingMode, ScenarioConfig};
use super::grid::{Grid, Point};
use crate::channel::fading::{sample_fading, FadingKind};
use crate::error::{Error, Result};

const PLACEMENT_STREAM: u64 = 1;
const MISSION_STREAM: u64 = 2;
const FADING_STREAM: u64 = 3;

/// A transmitter in the uplink. UEs order before UAVs, each by id, which is
/// the order resource blocks are handed out in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Device {
    Ue(usize),
    Uav(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseStation {
    pub id: usize,
    pub position: Point,
    pub ues: Vec<usize>,
    pub uavs: Vec<usize>,
    /// RB index -> device holding it, if any.
    pub rb_map: Vec<Option<Device>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundUe {
    pub id: usize,
    pub position: Point,
    pub serving_bs: usize,
    pub tx_power_w: f64,
    pub rbs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mission {
    pub origin: usize,
    pub destination: usize,
    pub altitude_m: f64,
    pub max_power_w: f64,
    pub packet_rate: f64,
    pub packet_size_bits: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UavState {
    pub id: usize,
    pub cell: usize,
    pub altitude_m: f64,
    pub serving_bs: Option<usize>,
    /// 1-based power level; 0 while silent.
    pub power_level: usize,
    pub power_w: f64,
    pub rbs: Vec<usize>,
    pub done: bool,
    /// Horizontal distance to the destination before the latest move.
    pub prev_dist_m: f64,
    /// Cells occupied so far, origin first, one entry per stage.
    pub path: Vec<usize>,
}

impl UavState {
    pub fn is_transmitting(&self) -> bool {
        self.serving_bs.is_some() && self.power_w > 0.0 && !self.rbs.is_empty()
    }

    pub fn tx_power_per_rb_w(&self) -> f64 {
        if self.rbs.is_empty() {
            0.0
        } else {
            self.power_w / self.rbs.len() as f64
        }
    }

    pub fn silence(&mut self) {
        self.serving_bs = None;
        self.power_level = 0;
        self.power_w = 0.0;
        self.rbs.clear();
    }
}

/// Small-scale fading gains for every (transmitter, BS, RB slot) link.
/// Slot `k` is the transmitter's k-th resource block.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingTable {
    bs_count: usize,
    ue_slots: usize,
    uav_slots: usize,
    ue: Vec<f64>,
    uav: Vec<f64>,
}

impl FadingTable {
    fn unit(bs_count: usize, ues: usize, ue_slots: usize, uavs: usize, uav_slots: usize) -> Self {
        FadingTable {
            bs_count,
            ue_slots,
            uav_slots,
            ue: vec![1.0; ues * bs_count * ue_slots],
            uav: vec![1.0; uavs * bs_count * uav_slots],
        }
    }

    pub fn gain(&self, device: Device, bs: usize, slot: usize) -> f64 {
        match device {
            Device::Ue(q) => self.ue[(q * self.bs_count + bs) * self.ue_slots + slot],
            Device::Uav(j) => self.uav[(j * self.bs_count + bs) * self.uav_slots + slot],
        }
    }

    pub fn set_gain(&mut self, device: Device, bs: usize, slot: usize, gain: f64) {
        let idx = match device {
            Device::Ue(q) => (q * self.bs_count + bs) * self.ue_slots + slot,
            Device::Uav(j) => (j * self.bs_count + bs) * self.uav_slots + slot,
        };
        match device {
            Device::Ue(_) => self.ue[idx] = gain,
            Device::Uav(_) => self.uav[idx] = gain,
        }
    }

    fn redraw(&mut self, rician_k: f64, rng: &mut ChaCha8Rng) -> Result<()> {
        for g in self.ue.iter_mut() {
            *g = sample_fading(FadingKind::Rayleigh, rng)?.gain;
        }
        for g in self.uav.iter_mut() {
            *g = sample_fading(FadingKind::Rician { k: rician_k }, rng)?.gain;
        }
        Ok(())
    }
}

/// Full network snapshot: static topology plus the per-stage dynamic part
/// (UAV states, RB maps, fading draws).
#[derive(Clone, Debug)]
pub struct World {
    pub config: ScenarioConfig,
    pub grid: Grid,
    pub base_stations: Vec<BaseStation>,
    pub ues: Vec<GroundUe>,
    pub uavs: Vec<UavState>,
    pub missions: Vec<Mission>,
    pub fading: FadingTable,
    pub stage: usize,
    pub seed: u64,
    fading_rng: ChaCha8Rng,
}

impl PartialEq for World {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.grid == other.grid
            && self.base_stations == other.base_stations
            && self.ues == other.ues
            && self.uavs == other.uavs
            && self.missions == other.missions
            && self.fading == other.fading
            && self.stage == other.stage
            && self.seed == other.seed
    }
}

/// Independent ChaCha stream `id` under `seed`.
pub fn rng_stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn uniform_point(rng: &mut impl Rng, w: f64, h: f64) -> Point {
    Point::new(rng.random::<f64>() * w, rng.random::<f64>() * h)
}

/// Builds the world for `(config, seed)`. BSs and UEs are dropped uniformly
/// at random, each UE attaches to its nearest BS, and every UAV starts silent
/// at its mission origin.
pub fn build_world(config: &ScenarioConfig, seed: u64) -> Result<World> {
    build_episode_world(config, seed, 0)
}

/// Same topology as `build_world(config, seed)` with the missions and fading
/// of episode `episode`. Episode 0 is `build_world` itself.
pub fn build_episode_world(config: &ScenarioConfig, seed: u64, episode: u64) -> Result<World> {
    config.validate()?;
    let grid = Grid::new(config.grid_cols(), config.grid_rows(), config.grid_step_m);
    let (w, h) = (config.area_width_m, config.area_height_m);

    let mut rng = rng_stream(seed, PLACEMENT_STREAM);
    let mut base_stations: Vec<BaseStation> = (0..config.bs_count)
        .map(|id| BaseStation {
            id,
            position: uniform_point(&mut rng, w, h),
            ues: Vec::new(),
            uavs: Vec::new(),
            rb_map: vec![None; config.total_rbs()],
        })
        .collect();
    let positions: Vec<Point> = base_stations.iter().map(|b| b.position).collect();
    let mut ues: Vec<GroundUe> = (0..config.ue_count)
        .map(|id| {
            let position = uniform_point(&mut rng, w, h);
            let serving_bs = nearest_bs_list(&positions, position, 1)[0];
            GroundUe {
                id,
                position,
                serving_bs,
                tx_power_w: config.ue_tx_power_w,
                rbs: Vec::new(),
            }
        })
        .collect();
    for ue in &ues {
        base_stations[ue.serving_bs].ues.push(ue.id);
    }

    let mut rng = rng_stream(seed, MISSION_STREAM + (episode << 8));
    let missions = config
        .uav_missions
        .iter()
        .map(|m| {
            let origin = m.origin.unwrap_or_else(|| loop {
                let c = rng.random_range(0..grid.len());
                if Some(c) != m.destination {
                    break c;
                }
            });
            let destination = m.destination.unwrap_or_else(|| loop {
                let c = rng.random_range(0..grid.len());
                if c != origin {
                    break c;
                }
            });
            let packet_rate = m.packet_rate.unwrap_or_else(|| loop {
                let r: f64 = rng.random();
                if r > 0.0 {
                    break r;
                }
            });
            Mission {
                origin,
                destination,
                altitude_m: m.altitude_m,
                max_power_w: m.max_power_w,
                packet_rate,
                packet_size_bits: m.packet_size_bits,
            }
        })
        .collect::<Vec<_>>();

    let uavs = missions
        .iter()
        .enumerate()
        .map(|(id, m)| -> Result<UavState> {
            let here = grid.cell_center(m.origin)?;
            let dest = grid.cell_center(m.destination)?;
            Ok(UavState {
                id,
                cell: m.origin,
                altitude_m: m.altitude_m,
                serving_bs: None,
                power_level: 0,
                power_w: 0.0,
                rbs: Vec::new(),
                done: false,
                prev_dist_m: here.distance(dest),
                path: vec![m.origin],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut world = World {
        fading: FadingTable::unit(
            config.bs_count,
            ues.len(),
            config.rbs_per_ue,
            uavs.len(),
            config.rbs_per_uav,
        ),
        config: config.clone(),
        grid,
        base_stations,
        ues: Vec::new(),
        uavs,
        missions,
        stage: 0,
        seed,
        fading_rng: rng_stream(seed, FADING_STREAM + (episode << 8)),
    };
    std::mem::swap(&mut world.ues, &mut ues);
    world.reallocate_rbs()?;
    world.redraw_fading()?;
    Ok(world)
}

/// BS ids sorted by horizontal distance from `position`, ties by id,
/// truncated to `count`.
pub fn nearest_bs_list(bs_positions: &[Point], position: Point, count: usize) -> Vec<usize> {
    let mut ids: Vec<(f64, usize)> = bs_positions
        .iter()
        .enumerate()
        .map(|(i, p)| (p.distance_sq(position), i))
        .collect();
    ids.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ids.into_iter().take(count).map(|(_, i)| i).collect()
}

/// Lowest-index-first RB assignment at one BS, in request order. Returns one
/// RB set per request; sets are disjoint.
pub fn allocate_rbs(bs: usize, capacity: usize, requests: &[(Device, usize)]) -> Result<Vec<Vec<usize>>> {
    let requested: usize = requests.iter().map(|r| r.1).sum();
    if requested > capacity {
        return Err(Error::RbCapacity {
            bs,
            requested,
            available: capacity,
        });
    }
    let mut next = 0;
    Ok(requests
        .iter()
        .map(|&(_, n)| {
            let set = (next..next + n).collect();
            next += n;
            set
        })
        .collect())
}

impl World {
    pub fn bs_positions(&self) -> Vec<Point> {
        self.base_stations.iter().map(|b| b.position).collect()
    }

    pub fn nearest_bs_list(&self, position: Point, count: usize) -> Vec<usize> {
        nearest_bs_list(&self.bs_positions(), position, count)
    }

    pub fn uav(&self, id: usize) -> Result<&UavState> {
        self.uavs.get(id).ok_or(Error::UnknownUav(id))
    }

    pub fn uav_position(&self, id: usize) -> Result<Point> {
        self.grid.cell_center(self.uav(id)?.cell)
    }

    pub fn destination_center(&self, id: usize) -> Result<Point> {
        self.grid
            .cell_center(self.missions.get(id).ok_or(Error::UnknownUav(id))?.destination)
    }

    pub fn live_uavs(&self) -> impl Iterator<Item = &UavState> {
        self.uavs.iter().filter(|u| !u.done)
    }

    /// Every device that holds RBs, with its serving BS, per-RB transmit
    /// power and RB set.
    pub fn transmitters(&self) -> impl Iterator<Item = (Device, usize, f64, &[usize])> {
        let ues = self.ues.iter().filter(|u| !u.rbs.is_empty()).map(|u| {
            (
                Device::Ue(u.id),
                u.serving_bs,
                u.tx_power_w / u.rbs.len() as f64,
                u.rbs.as_slice(),
            )
        });
        let uavs = self.uavs.iter().filter(|u| u.is_transmitting()).map(|u| {
            (
                Device::Uav(u.id),
                u.serving_bs.expect("transmitting UAV has a serving BS"),
                u.tx_power_per_rb_w(),
                u.rbs.as_slice(),
            )
        });
        ues.chain(uavs)
    }

    /// Rebuilds every BS's RB map: attached UEs first, then transmitting
    /// UAVs, each in id order.
    pub fn reallocate_rbs(&mut self) -> Result<()> {
        let capacity = self.config.total_rbs();
        for bs in &mut self.base_stations {
            bs.uavs.clear();
        }
        for uav in &self.uavs {
            if let Some(s) = uav.serving_bs {
                self.base_stations[s].uavs.push(uav.id);
            }
        }
        for bs in &mut self.base_stations {
            bs.uavs.sort_unstable();
            let mut requests: Vec<(Device, usize)> = bs
                .ues
                .iter()
                .map(|&q| (Device::Ue(q), self.config.rbs_per_ue))
                .collect();
            requests.extend(bs.uavs.iter().map(|&j| (Device::Uav(j), self.config.rbs_per_uav)));
            let sets = allocate_rbs(bs.id, capacity, &requests)?;
            bs.rb_map.iter_mut().for_each(|slot| *slot = None);
            for ((device, _), set) in requests.iter().zip(sets) {
                for &rb in &set {
                    debug_assert!(bs.rb_map[rb].is_none());
                    bs.rb_map[rb] = Some(*device);
                }
                match *device {
                    Device::Ue(q) => self.ues[q].rbs = set,
                    Device::Uav(j) => self.uavs[j].rbs = set,
                }
            }
        }
        Ok(())
    }

    /// Draws a fresh set of i.i.d. fading gains from the world's own stream.
    pub fn redraw_fading(&mut self) -> Result<()> {
        if self.config.fading == FadingMode::Random {
            self.fading.redraw(self.config.rician_k, &mut self.fading_rng)?;
        }
        Ok(())
    }

    /// Checks that no RB at any BS is held by two devices and that every
    /// device's RB set agrees with the BS maps.
    pub fn check_rb_exclusivity(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        for (device, bs, _, rbs) in self.transmitters() {
            for &rb in rbs {
                if !seen.insert((bs, rb)) || self.base_stations[bs].rb_map.get(rb) != Some(&Some(device)) {
                    return false;
                }
            }
        }
        true
    }
}
