use crate::channel::uav_link_report;
use crate::scenario::{UtilityWeights, World};

/// The three cost terms of a UAV's stage utility, before weighting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiTerms {
    /// Interference caused at non-serving BSs, W.
    pub interference_w: f64,
    /// Link delay (saturated when the queue is unstable), s.
    pub delay_s: f64,
    /// Sum of per-RB SINRs at the serving BS.
    pub sinr_sum: f64,
}

impl PhiTerms {
    pub fn shortfall(&self, threshold: f64) -> f64 {
        (self.sinr_sum - threshold).min(0.0)
    }

    pub fn phi(&self, w: &UtilityWeights, threshold: f64) -> f64 {
        let s = self.shortfall(threshold);
        -w.interference * self.interference_w - w.delay * self.delay_s - w.sinr_penalty * s * s
    }

    pub fn penalty(&self, w: &UtilityWeights, threshold: f64) -> f64 {
        let s = self.shortfall(threshold);
        w.sinr_penalty * s * s
    }
}

/// Evaluates the cost terms on a post-action world.
pub fn phi_terms(world: &World, uav: usize) -> PhiTerms {
    let report = uav_link_report(world, uav);
    PhiTerms {
        interference_w: report.caused_interference_w,
        delay_s: report.delay_or(world.config.saturation_delay_s),
        sinr_sum: report.sinr_sum(),
    }
}

pub fn phi(world: &World, uav: usize) -> f64 {
    phi_terms(world, uav).phi(&world.config.weights, world.config.sinr_threshold)
}

/// Stage utility: `phi` plus or minus the progress bonus depending on
/// whether the move brought the UAV closer to, or farther from, its
/// destination.
pub fn utility(phi: f64, prev_dist_m: f64, dist_m: f64, progress_bonus: f64) -> f64 {
    if dist_m < prev_dist_m {
        phi + progress_bonus
    } else if dist_m > prev_dist_m {
        phi - progress_bonus
    } else {
        phi
    }
}

/// Utility of the UAV's latest move, read off the post-action world.
pub fn stage_utility(world: &World, uav: usize) -> f64 {
    let u = &world.uavs[uav];
    let here = world.grid.cell_center(u.cell).expect("valid cell");
    let dest = world.destination_center(uav).expect("valid mission");
    utility(
        phi(world, uav),
        u.prev_dist_m,
        here.distance(dest),
        world.config.weights.progress_bonus,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(i: f64, d: f64, s: f64) -> UtilityWeights {
        UtilityWeights {
            interference: i,
            delay: d,
            sinr_penalty: s,
            progress_bonus: 1.0,
        }
    }

    #[test]
    fn delay_only() {
        let t = PhiTerms {
            interference_w: 3.0,
            delay_s: 0.0065,
            sinr_sum: 0.0,
        };
        assert!((t.phi(&w(0.0, 1.0, 0.0), 0.5) + 0.0065).abs() < 1e-15);
    }

    #[test]
    fn penalty_clamps_above_threshold() {
        let t = PhiTerms {
            interference_w: 0.0,
            delay_s: 0.0,
            sinr_sum: 0.6,
        };
        assert_eq!(t.penalty(&w(1.0, 1.0, 10.0), 0.5), 0.0);
        assert_eq!(t.phi(&w(1.0, 1.0, 10.0), 0.5), 0.0);
        let t = PhiTerms { sinr_sum: 0.3, ..t };
        assert!((t.penalty(&w(1.0, 1.0, 10.0), 0.5) - 10.0 * 0.04).abs() < 1e-12);
    }

    #[test]
    fn utility_branches() {
        assert_eq!(utility(0.0, 100.0, 60.0, 1.0), 1.0);
        assert_eq!(utility(-0.25, 100.0, 100.0, 1.0), -0.25);
        assert!((utility(-0.0065, 60.0, 100.0, 1.0) + 1.0065).abs() < 1e-15);
    }
}
