use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::io::write_csv;
use super::{
    bounds_sweep, default_bounds_axes, run_experiment, train_seed, with_altitude, with_bs_count, with_uav_count,
    Scheme, SeedRun,
};
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Altitude bounds against the SINR threshold.
    Fig2,
    /// Latency and UE rate against the number of UAVs.
    Fig4,
    /// Latency and UE rate against UAV altitude.
    Fig5,
    /// Mean UAV transmit power against the number of BSs.
    Fig6,
    /// Latency and UE rate against the number of BSs.
    Fig7,
    /// Latency and UE rate against the number of BSs, per altitude.
    Fig8,
    /// Training error per block of 20 iterations, per learning rate.
    Fig10,
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "fig2" => Figure::Fig2,
            "fig4" => Figure::Fig4,
            "fig5" => Figure::Fig5,
            "fig6" => Figure::Fig6,
            "fig7" => Figure::Fig7,
            "fig8" => Figure::Fig8,
            "fig10" => Figure::Fig10,
            other => return Err(Error::Config(format!("unknown figure {other:?}"))),
        })
    }
}

/// One observation of one series at one x value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigurePoint {
    pub panel: String,
    pub x: f64,
    pub series: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub figure: Figure,
    pub panel: String,
    pub x: f64,
    pub series: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Groups points by (panel, series, x) and reduces each group to mean and
/// sample standard deviation.
pub fn aggregate(figure: Figure, points: &[FigurePoint]) -> Vec<FigureRow> {
    let mut groups: BTreeMap<(String, String, u64), (f64, Vec<f64>)> = BTreeMap::new();
    for p in points {
        let key = (p.panel.clone(), p.series.clone(), ordered_bits(p.x));
        groups.entry(key).or_insert_with(|| (p.x, Vec::new())).1.push(p.value);
    }
    groups
        .into_iter()
        .map(|((panel, series, _), (x, vals))| {
            let s = super::Stat::of(&vals);
            FigureRow {
                figure,
                panel,
                x,
                series,
                mean: s.mean,
                std: s.std,
                n: vals.len(),
            }
        })
        .collect()
}

/// Maps an f64 to a u64 with the same ordering.
fn ordered_bits(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Writes plot-ready rows `(figure, panel, x, series, mean, std, n)`.
pub fn export_figure_data(points: &[FigurePoint], figure: Figure, path: &Path) -> Result<Vec<FigureRow>> {
    if points.is_empty() {
        return Err(Error::EmptyResults);
    }
    let rows = aggregate(figure, points);
    write_csv(path, &rows)?;
    Ok(rows)
}

fn point(panel: &str, x: f64, series: impl Into<String>, value: f64) -> FigurePoint {
    FigurePoint {
        panel: panel.to_string(),
        x,
        series: series.into(),
        value,
    }
}

fn latency_rate_points(x: f64, series: &str, runs: &[SeedRun], out: &mut Vec<FigurePoint>) {
    for m in runs.iter().flat_map(|r| &r.metrics) {
        out.push(point("latency_ms", x, series, m.mean_delay_s() * 1e3));
        out.push(point("ue_rate_mbps", x, series, m.mean_ue_rate_bps() / 1e6));
    }
}

fn both_schemes(
    x: f64,
    cfg: &ScenarioConfig,
    seeds: &[u64],
    episodes: usize,
    out: &mut Vec<FigurePoint>,
) -> Result<()> {
    for scheme in [Scheme::Trained, Scheme::Baseline] {
        let runs = run_experiment(scheme, cfg, seeds, episodes, None)?;
        latency_rate_points(x, &scheme.to_string(), &runs, out);
    }
    Ok(())
}

pub const UAV_COUNTS: [usize; 5] = [1, 2, 3, 4, 5];
pub const BS_COUNTS: [usize; 3] = [10, 20, 30];
pub const ALTITUDES_M: [f64; 3] = [120.0, 180.0, 240.0];
pub const LEARNING_RATES: [f64; 3] = [0.0001, 0.01, 0.1];

/// Runs the experiments behind `figure` and returns its raw points.
pub fn figure_points(
    figure: Figure,
    config: &ScenarioConfig,
    seeds: &[u64],
    episodes: usize,
) -> Result<Vec<FigurePoint>> {
    let mut out = Vec::new();
    match figure {
        Figure::Fig2 => {
            let (g, c, p) = default_bounds_axes(config);
            for r in bounds_sweep(config, &g, &c, &p) {
                let series = format!("P={} W, I={} W", r.power_w, r.i_cap_w);
                out.push(point("h_max_m", r.gamma_db, series.clone(), r.h_max_m));
                out.push(point("h_min_m", r.gamma_db, series, r.h_min_m));
            }
        }
        Figure::Fig4 => {
            for n in UAV_COUNTS {
                both_schemes(n as f64, &with_uav_count(config, n), seeds, episodes, &mut out)?;
            }
        }
        Figure::Fig5 => {
            for h in ALTITUDES_M {
                both_schemes(h, &with_altitude(config, h), seeds, episodes, &mut out)?;
            }
        }
        Figure::Fig6 => {
            for b in BS_COUNTS {
                let runs = run_experiment(Scheme::Trained, &with_bs_count(config, b), seeds, episodes, None)?;
                for m in runs.iter().flat_map(|r| &r.metrics) {
                    out.push(point("power_w", b as f64, "trained", m.mean_power_w()));
                }
            }
        }
        Figure::Fig7 => {
            for b in BS_COUNTS {
                both_schemes(b as f64, &with_bs_count(config, b), seeds, episodes, &mut out)?;
            }
        }
        Figure::Fig8 => {
            for h in ALTITUDES_M {
                for b in BS_COUNTS {
                    let cfg = with_altitude(&with_bs_count(config, b), h);
                    let runs = run_experiment(Scheme::Trained, &cfg, seeds, episodes, None)?;
                    latency_rate_points(b as f64, &format!("h={h} m"), &runs, &mut out);
                }
            }
        }
        Figure::Fig10 => {
            for lr in LEARNING_RATES {
                let mut cfg = config.clone();
                cfg.learn_rate = lr;
                for &s in seeds {
                    let t = train_seed(&cfg, s)?;
                    for (k, e) in t.error_curve(20).into_iter().enumerate() {
                        out.push(point("td_error", (20 * (k + 1)) as f64, format!("lr={lr}"), e));
                    }
                }
            }
        }
    }
    Ok(out)
}
