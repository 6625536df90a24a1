use serde::{Deserialize, Serialize};

use crate::agent::StageRecord;
use crate::scenario::ScenarioConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Trained,
    Baseline,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Trained => "trained",
            Scheme::Baseline => "baseline",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UavMetrics {
    pub steps: usize,
    pub mean_delay_s: f64,
    pub energy_j: f64,
    pub mean_power_w: f64,
    pub delivered_bits: f64,
    pub arrived: bool,
    pub discounted_return: f64,
}

/// What a record set alone does not say about its episode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeContext {
    pub scheme: Scheme,
    pub seed: u64,
    pub episode: usize,
    pub uav_count: usize,
    pub ue_count: usize,
    pub bs_count: usize,
    pub stage_s: f64,
    pub discount: f64,
}

impl EpisodeContext {
    pub fn new(config: &ScenarioConfig, scheme: Scheme, seed: u64, episode: usize) -> Self {
        EpisodeContext {
            scheme,
            seed,
            episode,
            uav_count: config.uav_count(),
            ue_count: config.ue_count,
            bs_count: config.bs_count,
            stage_s: config.stage_duration_s(),
            discount: config.discount,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub scheme: Scheme,
    pub seed: u64,
    pub episode: usize,
    pub uavs: Vec<UavMetrics>,
    pub ue_mean_rate_bps: Vec<f64>,
    /// Mean over active UAV-stages of the interference a UAV causes at each
    /// non-serving BS.
    pub mean_interference_w: f64,
    /// Delivered UAV bits per joule of UAV transmit energy.
    pub efficiency_bits_per_j: f64,
}

pub(crate) fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

impl EpisodeMetrics {
    /// Computes every metric from the stage records. UAV means run over the
    /// stages in which that UAV acted; UE means over all captured stages.
    pub fn from_records(ctx: &EpisodeContext, records: &[StageRecord]) -> Self {
        let mut uavs = vec![UavMetrics::default(); ctx.uav_count];
        let mut delay_sum = vec![0.0; ctx.uav_count];
        let mut interference = Vec::new();
        for rec in records {
            for s in rec.uavs.iter().filter(|s| s.active) {
                let m = &mut uavs[s.uav];
                m.discounted_return += ctx.discount.powi(m.steps as i32) * s.utility;
                m.steps += 1;
                m.energy_j += s.power_w * ctx.stage_s;
                m.mean_power_w += s.power_w;
                m.delivered_bits += s.rate_bps * ctx.stage_s;
                m.arrived = s.arrived;
                delay_sum[s.uav] += s.delay_s;
                interference.push(s.caused_interference_w / (ctx.bs_count.max(2) - 1) as f64);
            }
        }
        for (m, d) in uavs.iter_mut().zip(delay_sum) {
            if m.steps > 0 {
                m.mean_delay_s = d / m.steps as f64;
                m.mean_power_w /= m.steps as f64;
            }
        }
        let captured: Vec<&StageRecord> = records
            .iter()
            .filter(|r| r.ue_rates_bps.len() == ctx.ue_count)
            .collect();
        let ue_mean_rate_bps = (0..ctx.ue_count)
            .map(|q| mean(captured.iter().map(|r| r.ue_rates_bps[q])))
            .collect();
        let bits: f64 = uavs.iter().map(|m| m.delivered_bits).sum();
        let energy: f64 = uavs.iter().map(|m| m.energy_j).sum();
        EpisodeMetrics {
            scheme: ctx.scheme,
            seed: ctx.seed,
            episode: ctx.episode,
            uavs,
            ue_mean_rate_bps,
            mean_interference_w: mean(interference),
            efficiency_bits_per_j: if energy > 0.0 { bits / energy } else { 0.0 },
        }
    }

    fn acted(&self) -> impl Iterator<Item = &UavMetrics> {
        self.uavs.iter().filter(|m| m.steps > 0)
    }

    pub fn mean_steps(&self) -> f64 {
        mean(self.uavs.iter().map(|m| m.steps as f64))
    }

    pub fn mean_delay_s(&self) -> f64 {
        mean(self.acted().map(|m| m.mean_delay_s))
    }

    pub fn mean_energy_j(&self) -> f64 {
        mean(self.uavs.iter().map(|m| m.energy_j))
    }

    pub fn mean_power_w(&self) -> f64 {
        mean(self.acted().map(|m| m.mean_power_w))
    }

    pub fn arrived_fraction(&self) -> f64 {
        mean(self.uavs.iter().map(|m| if m.arrived { 1.0 } else { 0.0 }))
    }

    pub fn mean_ue_rate_bps(&self) -> f64 {
        mean(self.ue_mean_rate_bps.iter().copied())
    }

    pub fn mean_return(&self) -> f64 {
        mean(self.uavs.iter().map(|m| m.discounted_return))
    }

    pub fn row(&self, manifest: &str) -> MetricsRow {
        MetricsRow {
            scheme: self.scheme,
            seed: self.seed,
            episode: self.episode,
            uav_count: self.uavs.len(),
            mean_steps: self.mean_steps(),
            mean_delay_s: self.mean_delay_s(),
            mean_energy_j: self.mean_energy_j(),
            mean_power_w: self.mean_power_w(),
            arrived_fraction: self.arrived_fraction(),
            mean_ue_rate_bps: self.mean_ue_rate_bps(),
            mean_interference_w: self.mean_interference_w,
            efficiency_bits_per_j: self.efficiency_bits_per_j,
            mean_return: self.mean_return(),
            manifest: manifest.to_string(),
        }
    }
}

/// One CSV line per (seed, episode).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scheme: Scheme,
    pub seed: u64,
    pub episode: usize,
    pub uav_count: usize,
    pub mean_steps: f64,
    pub mean_delay_s: f64,
    pub mean_energy_j: f64,
    pub mean_power_w: f64,
    pub arrived_fraction: f64,
    pub mean_ue_rate_bps: f64,
    pub mean_interference_w: f64,
    pub efficiency_bits_per_j: f64,
    pub mean_return: f64,
    pub manifest: String,
}

impl MetricsRow {
    pub const NUMERIC: [&'static str; 10] = [
        "mean_steps",
        "mean_delay_s",
        "mean_energy_j",
        "mean_power_w",
        "arrived_fraction",
        "mean_ue_rate_bps",
        "mean_interference_w",
        "efficiency_bits_per_j",
        "mean_return",
        "uav_count",
    ];

    pub fn numeric(&self) -> [f64; 10] {
        [
            self.mean_steps,
            self.mean_delay_s,
            self.mean_energy_j,
            self.mean_power_w,
            self.arrived_fraction,
            self.mean_ue_rate_bps,
            self.mean_interference_w,
            self.efficiency_bits_per_j,
            self.mean_return,
            self.uav_count as f64,
        ]
    }
}

/// Mean and sample standard deviation of one metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        let m = mean(xs.iter().copied());
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat { mean: m, std }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub stats: Vec<(&'static str, Stat)>,
}

pub fn summarize(rows: &[MetricsRow]) -> Summary {
    let stats = MetricsRow::NUMERIC
        .iter()
        .enumerate()
        .map(|(k, &name)| {
            let xs: Vec<f64> = rows.iter().map(|r| r.numeric()[k]).collect();
            (name, Stat::of(&xs))
        })
        .collect();
    Summary {
        rows: rows.len(),
        stats,
    }
}

impl Summary {
    pub fn get(&self, name: &str) -> Option<Stat> {
        self.stats.iter().find(|(n, _)| *n == name).map(|&(_, s)| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::UavStage;

    fn stage(uav: usize, active: bool, power: f64, delay: f64, rate: f64) -> UavStage {
        UavStage {
            uav,
            active,
            power_w: power,
            delay_s: delay,
            rate_bps: rate,
            utility: 1.0,
            caused_interference_w: 2e-10,
            ..UavStage::default()
        }
    }

    #[test]
    fn hand_computed_episode() {
        let records = vec![
            StageRecord {
                stage: 1,
                uavs: vec![stage(0, true, 0.1, 1e-3, 1e6), stage(1, true, 0.05, 3e-3, 2e6)],
                ue_rates_bps: vec![1.0, 3.0],
                bs_interference_w: vec![],
            },
            StageRecord {
                stage: 2,
                uavs: vec![stage(0, true, 0.1, 2e-3, 1e6), stage(1, false, 0.0, 0.0, 0.0)],
                ue_rates_bps: vec![2.0, 5.0],
                bs_interference_w: vec![],
            },
        ];
        let ctx = EpisodeContext {
            scheme: Scheme::Trained,
            seed: 1,
            episode: 0,
            uav_count: 2,
            ue_count: 2,
            bs_count: 3,
            stage_s: 4.0,
            discount: 0.5,
        };
        let m = EpisodeMetrics::from_records(&ctx, &records);
        assert_eq!(m.uavs[0].steps, 2);
        assert_eq!(m.uavs[1].steps, 1);
        assert!((m.uavs[0].mean_delay_s - 1.5e-3).abs() < 1e-15);
        assert!((m.uavs[0].energy_j - 0.8).abs() < 1e-12);
        assert!((m.uavs[0].discounted_return - 1.5).abs() < 1e-15);
        assert_eq!(m.ue_mean_rate_bps, vec![1.5, 4.0]);
        assert!((m.mean_interference_w - 1e-10).abs() < 1e-22);
        let bits = 4.0 * (1e6 + 1e6 + 2e6);
        let energy = 4.0 * (0.1 + 0.1 + 0.05);
        assert!((m.efficiency_bits_per_j - bits / energy).abs() < 1e-6);
        assert!((m.mean_delay_s() - (1.5e-3 + 3e-3) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn stat_sample_std() {
        let s = Stat::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 1.0).abs() < 1e-15);
        assert_eq!(Stat::of(&[4.0]).std, 0.0);
    }
}
