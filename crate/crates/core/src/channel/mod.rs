//! Radio math: path loss, fading, SINR, rates, interference sums and the
//! M/D/1 link delay.

pub mod fading;

use crate::error::{Error, Result};
use crate::scenario::{Device, World};

pub use fading::{sample_fading, FadingDraw, FadingKind};

/// UE-link distances below this are evaluated at it.
pub const MIN_UE_DISTANCE_M: f64 = 1.0;

/// Free-space loss of the UAV-BS link.
pub fn uav_path_loss_db(d_m: f64, f_hz: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::NonPositiveDistance(d_m));
    }
    if !(f_hz > 0.0) {
        return Err(Error::NonPositiveFrequency(f_hz));
    }
    Ok(20.0 * d_m.log10() + 20.0 * f_hz.log10() - 147.55)
}

/// Terrestrial UE-BS loss at 2 GHz.
pub fn ue_path_loss_db(d_m: f64) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::NonPositiveDistance(d_m));
    }
    Ok(15.3 + 37.6 * d_m.log10())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    pub tx_power_per_rb_w: f64,
    /// Linear channel gain: fading times path-loss attenuation.
    pub channel_gain: f64,
    pub interference_w: f64,
    pub noise_w: f64,
}

impl LinkBudget {
    pub fn sinr(&self) -> f64 {
        sinr(self)
    }
}

pub fn sinr(link: &LinkBudget) -> f64 {
    debug_assert!(link.noise_w > 0.0);
    link.tx_power_per_rb_w * link.channel_gain / (link.interference_w + link.noise_w)
}

/// Shannon rate summed over RBs.
pub fn rate_bps(sinrs: &[f64], rb_bandwidth_hz: f64) -> f64 {
    sinrs.iter().map(|g| rb_bandwidth_hz * (1.0 + g).log2()).sum()
}

pub fn uav_rate_bps(sinrs: &[f64], rb_bandwidth_hz: f64) -> f64 {
    rate_bps(sinrs, rb_bandwidth_hz)
}

/// Mean sojourn time of an M/D/1 queue with arrival rate `lambda`
/// packets/s served by a link of `rate_bps` carrying `packet_bits` packets.
pub fn mdd1_delay_s(lambda: f64, rate_bps: f64, packet_bits: f64) -> Result<f64> {
    let mu = rate_bps / packet_bits;
    if !(mu > lambda) || lambda < 0.0 {
        return Err(Error::UnstableQueue { lambda, mu });
    }
    Ok(lambda / (2.0 * mu * (mu - lambda)) + 1.0 / mu)
}

/// Linear gain from `device` to base station `bs` on the device's `slot`-th RB.
pub fn link_gain(world: &World, device: Device, bs: usize, slot: usize) -> f64 {
    let bs_pos = world.base_stations[bs].position;
    let attenuation_db = match device {
        Device::Ue(q) => {
            let d = world.ues[q].position.distance(bs_pos).max(MIN_UE_DISTANCE_M);
            ue_path_loss_db(d).expect("distance clamped positive")
        }
        Device::Uav(j) => {
            let uav = &world.uavs[j];
            let here = world.grid.cell_center(uav.cell).expect("UAV cell valid");
            let d = (here.distance_sq(bs_pos) + uav.altitude_m * uav.altitude_m).sqrt();
            uav_path_loss_db(d.max(f64::MIN_POSITIVE), world.config.carrier_hz)
                .expect("validated carrier and positive distance")
        }
    };
    world.fading.gain(device, bs, slot) * 10f64.powf(-attenuation_db / 10.0)
}

/// Co-channel interference at `bs` on `rb`: every transmitter attached to a
/// different BS and holding `rb`, except `exclude`.
pub fn interference_at_bs(world: &World, bs: usize, rb: usize, exclude: Option<Device>) -> f64 {
    world
        .transmitters()
        .filter(|&(device, serving, _, _)| serving != bs && Some(device) != exclude)
        .filter_map(|(device, _, p, rbs)| {
            rbs.iter()
                .position(|&c| c == rb)
                .map(|slot| p * link_gain(world, device, bs, slot))
        })
        .sum()
}

/// Per-RB SINRs of a device towards its serving BS.
pub fn device_sinrs(world: &World, device: Device) -> Vec<f64> {
    let (serving, p, rbs) = match device {
        Device::Ue(q) => {
            let ue = &world.ues[q];
            if ue.rbs.is_empty() {
                return Vec::new();
            }
            (ue.serving_bs, ue.tx_power_w / ue.rbs.len() as f64, ue.rbs.as_slice())
        }
        Device::Uav(j) => {
            let uav = &world.uavs[j];
            match uav.serving_bs {
                Some(s) if uav.is_transmitting() => (s, uav.tx_power_per_rb_w(), uav.rbs.as_slice()),
                _ => return Vec::new(),
            }
        }
    };
    let noise_w = world.config.noise_per_rb_w();
    rbs.iter()
        .enumerate()
        .map(|(slot, &rb)| {
            LinkBudget {
                tx_power_per_rb_w: p,
                channel_gain: link_gain(world, device, serving, slot),
                interference_w: interference_at_bs(world, serving, rb, Some(device)),
                noise_w,
            }
            .sinr()
        })
        .collect()
}

pub fn ue_rate_bps(world: &World, ue: usize) -> f64 {
    rate_bps(&device_sinrs(world, Device::Ue(ue)), world.config.rb_bandwidth_hz)
}

/// Interference a UAV causes at every BS other than its serving one, summed
/// over its RBs.
pub fn caused_interference_w(world: &World, uav: usize) -> f64 {
    let u = &world.uavs[uav];
    let Some(serving) = u.serving_bs.filter(|_| u.is_transmitting()) else {
        return 0.0;
    };
    let p = u.tx_power_per_rb_w();
    (0..world.base_stations.len())
        .filter(|&r| r != serving)
        .map(|r| {
            (0..u.rbs.len())
                .map(|slot| p * link_gain(world, Device::Uav(uav), r, slot))
                .sum::<f64>()
        })
        .sum()
}

/// Radio summary of one UAV's uplink at the current stage.
#[derive(Clone, Debug, PartialEq)]
pub struct UavLinkReport {
    pub sinrs: Vec<f64>,
    pub rate_bps: f64,
    /// Queueing delay, `None` when the queue is unstable.
    pub delay_s: Option<f64>,
    pub caused_interference_w: f64,
}

impl UavLinkReport {
    pub fn sinr_sum(&self) -> f64 {
        self.sinrs.iter().sum()
    }

    pub fn delay_or(&self, saturation_s: f64) -> f64 {
        self.delay_s.map_or(saturation_s, |d| d.min(saturation_s))
    }
}

pub fn uav_link_report(world: &World, uav: usize) -> UavLinkReport {
    let sinrs = device_sinrs(world, Device::Uav(uav));
    let rate = rate_bps(&sinrs, world.config.rb_bandwidth_hz);
    let m = &world.missions[uav];
    UavLinkReport {
        delay_s: mdd1_delay_s(m.packet_rate, rate, m.packet_size_bits).ok(),
        rate_bps: rate,
        sinrs,
        caused_interference_w: caused_interference_w(world, uav),
    }
}
