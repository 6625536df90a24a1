use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_watts};

/// Small-scale fading model used when drawing link gains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingMode {
    /// Rician on UAV links, Rayleigh on UE links.
    Random,
    /// Every gain is exactly 1. Test-harness mode for like-for-like comparison
    /// against exhaustive search.
    Unit,
}

/// Whether the flying altitude stays at the mission value or is clamped to
/// the per-stage analytic altitude bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AltitudeMode {
    Fixed,
    ClampToBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MissionConfig {
    /// Origin cell; drawn at random when absent.
    pub origin: Option<usize>,
    /// Destination cell; drawn at random (distinct from origin) when absent.
    pub destination: Option<usize>,
    pub altitude_m: f64,
    pub max_power_w: f64,
    /// Mean packet arrival rate in packets/s; drawn from U(0, 1) when absent.
    pub packet_rate: Option<f64>,
    pub packet_size_bits: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig {
            origin: None,
            destination: None,
            altitude_m: 120.0,
            max_power_w: dbm_to_watts(20.0),
            packet_rate: None,
            packet_size_bits: 2000.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UtilityWeights {
    /// Weight on interference caused at non-serving base stations.
    pub interference: f64,
    /// Weight on the M/D/1 link delay.
    pub delay: f64,
    /// Penalty coefficient on the SINR-threshold shortfall.
    pub sinr_penalty: f64,
    /// Reward (or charge) for moving closer to (or away from) the destination.
    pub progress_bonus: f64,
}

impl Default for UtilityWeights {
    fn default() -> Self {
        UtilityWeights {
            interference: 1.0,
            delay: 1.0,
            sinr_penalty: 10.0,
            progress_bonus: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsnParams {
    /// Units per reservoir layer. When absent the sizes follow the UAV count:
    /// (12, 6) for up to two UAVs, (20, 10) otherwise.
    pub reservoir_sizes: Option<Vec<usize>>,
    /// Leak rate per layer.
    pub leak: Vec<f64>,
    pub spectral_radius_target: f64,
    pub input_scale: f64,
}

impl Default for EsnParams {
    fn default() -> Self {
        EsnParams {
            reservoir_sizes: None,
            leak: vec![0.99, 0.99],
            spectral_radius_target: 0.9,
            input_scale: 0.5,
        }
    }
}

impl EsnParams {
    pub fn sizes_for(&self, uav_count: usize) -> Vec<usize> {
        match &self.reservoir_sizes {
            Some(s) => s.clone(),
            None if uav_count <= 2 => vec![12, 6],
            None => vec![20, 10],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    /// Power level used by the shortest-path scheme; `None` means the top level.
    pub power_level: Option<usize>,
    /// 1-based rank in the nearest-BS list the baseline associates with.
    pub assoc_rank: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            power_level: None,
            assoc_rank: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub grid_step_m: f64,
    pub bs_count: usize,
    pub ue_count: usize,
    pub uav_missions: Vec<MissionConfig>,
    pub carrier_hz: f64,
    pub noise_psd_w_per_hz: f64,
    pub rb_bandwidth_hz: f64,
    pub total_bandwidth_hz: f64,
    pub rbs_per_uav: usize,
    pub rbs_per_ue: usize,
    pub ue_tx_power_w: f64,
    pub nearest_bs_count: usize,
    /// Linear SINR threshold.
    pub sinr_threshold: f64,
    pub weights: UtilityWeights,
    pub discount: f64,
    pub epsilon: f64,
    pub learn_rate: f64,
    pub power_levels: usize,
    pub esn: EsnParams,
    pub min_altitude_m: f64,
    /// Interference cap per (BS, RB) used by the lower altitude bound.
    pub interference_cap_w: f64,
    pub uav_speed_m_s: f64,
    /// Defaults to four times the grid's width plus height, in cells.
    pub max_episode_steps: Option<usize>,
    pub training_iterations: usize,
    pub rng_seed: u64,
    pub rician_k: f64,
    pub fading: FadingMode,
    /// Delay charged when the M/D/1 queue is unstable.
    pub saturation_delay_s: f64,
    pub distance_bin_m: f64,
    pub orientation_bins: usize,
    /// A UAV that reached its destination stops transmitting from the next stage.
    pub silence_on_arrival: bool,
    pub altitude_mode: AltitudeMode,
    pub baseline: BaselineConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            area_width_m: 800.0,
            area_height_m: 800.0,
            grid_step_m: 40.0,
            bs_count: 15,
            ue_count: 30,
            uav_missions: vec![MissionConfig::default()],
            carrier_hz: 2e9,
            noise_psd_w_per_hz: dbm_to_watts(-174.0),
            rb_bandwidth_hz: 180e3,
            total_bandwidth_hz: 20e6,
            rbs_per_uav: 3,
            rbs_per_ue: 3,
            ue_tx_power_w: dbm_to_watts(20.0),
            nearest_bs_count: 2,
            sinr_threshold: db_to_linear(-3.0),
            weights: UtilityWeights::default(),
            discount: 0.7,
            epsilon: 0.3,
            learn_rate: 0.01,
            power_levels: 5,
            esn: EsnParams::default(),
            min_altitude_m: 50.0,
            interference_cap_w: 1e-10,
            uav_speed_m_s: 10.0,
            max_episode_steps: None,
            training_iterations: 1000,
            rng_seed: 0,
            rician_k: 1.59,
            fading: FadingMode::Random,
            saturation_delay_s: 1.0,
            distance_bin_m: 100.0,
            orientation_bins: 8,
            silence_on_arrival: true,
            altitude_mode: AltitudeMode::Fixed,
            baseline: BaselineConfig::default(),
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn grid_cols(&self) -> usize {
        (self.area_width_m / self.grid_step_m).round() as usize
    }

    pub fn grid_rows(&self) -> usize {
        (self.area_height_m / self.grid_step_m).round() as usize
    }

    pub fn uav_count(&self) -> usize {
        self.uav_missions.len()
    }

    /// Number of resource blocks in the system bandwidth.
    pub fn total_rbs(&self) -> usize {
        (self.total_bandwidth_hz / self.rb_bandwidth_hz + 1e-9).floor() as usize
    }

    pub fn noise_per_rb_w(&self) -> f64 {
        self.noise_psd_w_per_hz * self.rb_bandwidth_hz
    }

    pub fn episode_step_cap(&self) -> usize {
        self.max_episode_steps
            .unwrap_or(4 * (self.grid_cols() + self.grid_rows()))
    }

    /// Stage duration: one grid step at constant speed.
    pub fn stage_duration_s(&self) -> f64 {
        self.grid_step_m / self.uav_speed_m_s
    }

    pub fn action_count(&self) -> usize {
        5 * self.power_levels * self.nearest_bs_count
    }

    /// Short stable digest of the configuration, used to tie checkpoints and
    /// output files to the run that produced them.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.grid_step_m > 0.0, || "grid_step_m must be positive".into())?;
        ensure(self.area_width_m > 0.0 && self.area_height_m > 0.0, || {
            "area dimensions must be positive".into()
        })?;
        for (name, dim) in [
            ("area_width_m", self.area_width_m),
            ("area_height_m", self.area_height_m),
        ] {
            let q = dim / self.grid_step_m;
            ensure((q - q.round()).abs() < 1e-9 && q.round() >= 1.0, || {
                format!("grid_step_m {} does not divide {name} {dim}", self.grid_step_m)
            })?;
        }
        ensure(self.bs_count >= 1, || "bs_count must be at least 1".into())?;
        ensure(
            self.nearest_bs_count >= 1 && self.nearest_bs_count <= self.bs_count,
            || {
                format!(
                    "nearest_bs_count {} must be in 1..={}",
                    self.nearest_bs_count, self.bs_count
                )
            },
        )?;
        ensure(!self.uav_missions.is_empty(), || {
            "at least one UAV mission is required".into()
        })?;
        let cells = self.grid_cols() * self.grid_rows();
        ensure(cells >= 2, || "grid must have at least two cells".into())?;
        for (j, m) in self.uav_missions.iter().enumerate() {
            for (what, c) in [("origin", m.origin), ("destination", m.destination)] {
                if let Some(c) = c {
                    ensure(c < cells, || format!("mission {j}: {what} {c} outside {cells} cells"))?;
                }
            }
            ensure(m.altitude_m > 0.0, || format!("mission {j}: altitude must be positive"))?;
            ensure(m.max_power_w >= 0.0, || {
                format!("mission {j}: max power must be nonnegative")
            })?;
            ensure(m.packet_size_bits > 0.0, || {
                format!("mission {j}: packet size must be positive")
            })?;
            if let Some(rate) = m.packet_rate {
                ensure(rate > 0.0 && rate < 1.0, || {
                    format!("mission {j}: packet_rate {rate} outside (0, 1)")
                })?;
            }
        }
        ensure(self.discount > 0.0 && self.discount < 1.0, || {
            "discount must be in (0, 1)".into()
        })?;
        ensure((0.0..=1.0).contains(&self.epsilon), || {
            "epsilon must be in [0, 1]".into()
        })?;
        ensure(self.learn_rate > 0.0, || "learn_rate must be positive".into())?;
        ensure(self.power_levels >= 1, || "power_levels must be at least 1".into())?;
        let w = &self.weights;
        ensure(
            w.interference >= 0.0 && w.delay >= 0.0 && w.sinr_penalty >= 0.0 && w.progress_bonus >= 0.0,
            || "utility weights must be nonnegative".into(),
        )?;
        let esn = &self.esn;
        let sizes = esn.sizes_for(self.uav_count());
        ensure(!sizes.is_empty() && sizes.iter().all(|&n| n > 0), || {
            "reservoir sizes must be nonempty and positive".into()
        })?;
        ensure(esn.leak.len() == sizes.len(), || {
            format!("{} leak rates given for {} layers", esn.leak.len(), sizes.len())
        })?;
        ensure(esn.leak.iter().all(|w| (0.0..=1.0).contains(w)), || {
            "leak rates must be in [0, 1]".into()
        })?;
        ensure(
            esn.spectral_radius_target > 0.0 && esn.spectral_radius_target < 1.0,
            || "spectral_radius_target must be in (0, 1)".into(),
        )?;
        ensure(esn.input_scale > 0.0, || "input_scale must be positive".into())?;
        ensure(
            self.rb_bandwidth_hz > 0.0 && self.total_bandwidth_hz >= self.rb_bandwidth_hz,
            || "bandwidths must be positive and total >= per-RB".into(),
        )?;
        ensure(self.rbs_per_uav >= 1 && self.rbs_per_ue >= 1, || {
            "RB set sizes must be at least 1".into()
        })?;
        ensure(self.carrier_hz > 0.0, || "carrier_hz must be positive".into())?;
        ensure(self.noise_psd_w_per_hz > 0.0, || {
            "noise_psd_w_per_hz must be positive".into()
        })?;
        ensure(self.rician_k >= 0.0, || "rician_k must be nonnegative".into())?;
        ensure(self.uav_speed_m_s > 0.0, || "uav_speed_m_s must be positive".into())?;
        ensure(self.saturation_delay_s > 0.0, || {
            "saturation_delay_s must be positive".into()
        })?;
        ensure(self.distance_bin_m > 0.0 && self.orientation_bins >= 1, || {
            "bin widths must be positive".into()
        })?;
        ensure(self.min_altitude_m >= 0.0, || {
            "min_altitude_m must be nonnegative".into()
        })?;
        ensure(self.interference_cap_w > 0.0, || {
            "interference_cap_w must be positive".into()
        })?;
        ensure((1..=self.nearest_bs_count).contains(&self.baseline.assoc_rank), || {
            "baseline.assoc_rank must index the nearest-BS list".into()
        })?;
        if let Some(p) = self.baseline.power_level {
            ensure((1..=self.power_levels).contains(&p), || {
                "baseline.power_level out of range".into()
            })?;
        }
        Ok(())
    }
}
