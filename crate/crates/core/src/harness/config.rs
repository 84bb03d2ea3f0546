//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ambit_sim::AmbitSetShape;
use crate::direct_sim::DelayQuantization;
use crate::error::{Error, Result};
use crate::scene::{ChannelParams, GridSteps, ReferenceGains, Scenario, SceneGeometry, TrajectoryModel};
use crate::stats::Taper;

const KMH_PER_MPS: f64 = 3.6;

fn default_bs_x() -> f64 {
    -100.0
}

fn default_bs_y() -> f64 {
    20.0
}

fn default_gains() -> ReferenceGains {
    ReferenceGains::Isotropic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default = "default_bs_x")]
    pub bs_x_m: f64,
    #[serde(default = "default_bs_y")]
    pub bs_y_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_path_count: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_arrival_rate_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disc_radius_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatterer_density_per_m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_speed_kmh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_speed_m_per_s: Option<f64>,
    #[serde(default)]
    pub acceleration_m_per_s2: f64,
    #[serde(default)]
    pub initial_y_m: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            bs_x_m: default_bs_x(),
            bs_y_m: default_bs_y(),
            mean_path_count: Some(100.0),
            path_arrival_rate_per_s: Some(100.0),
            disc_radius_m: None,
            scatterer_density_per_m2: None,
            initial_speed_kmh: Some(40.0),
            initial_speed_m_per_s: None,
            acceleration_m_per_s2: 0.0,
            initial_y_m: 0.0,
        }
    }
}

impl SceneConfig {
    pub fn speed_m_per_s(&self) -> Result<f64> {
        match (self.initial_speed_kmh, self.initial_speed_m_per_s) {
            (Some(kmh), None) => Ok(kmh / KMH_PER_MPS),
            (None, Some(mps)) => Ok(mps),
            (None, None) => Err(Error::config("scene.initial_speed_kmh", "an initial speed is required")),
            (Some(_), Some(_)) => Err(Error::config(
                "scene.initial_speed_kmh",
                "give the speed in km/h or in m/s, not both",
            )),
        }
    }

    pub fn geometry(&self) -> Result<SceneGeometry> {
        let v0 = self.speed_m_per_s()?;
        let bs = (self.bs_x_m, self.bs_y_m);
        let stats = (self.mean_path_count, self.path_arrival_rate_per_s);
        let disc = (self.disc_radius_m, self.scatterer_density_per_m2);
        match (stats, disc) {
            ((Some(ns), Some(rs)), (None, None)) => SceneGeometry::from_path_statistics(bs, ns, rs, v0),
            ((None, None), (Some(r), Some(lambda))) => SceneGeometry::from_disc(bs, r, lambda, v0),
            ((None, None), (None, None)) => Err(Error::config(
                "scene.mean_path_count",
                "provide (mean_path_count, path_arrival_rate_per_s) or (disc_radius_m, scatterer_density_per_m2)",
            )),
            ((Some(_), None) | (None, Some(_)), _) => Err(Error::config(
                "scene.path_arrival_rate_per_s",
                "mean_path_count and path_arrival_rate_per_s must be given together",
            )),
            (_, (Some(_), None) | (None, Some(_))) => Err(Error::config(
                "scene.scatterer_density_per_m2",
                "disc_radius_m and scatterer_density_per_m2 must be given together",
            )),
            _ => Err(Error::config(
                "scene.disc_radius_m",
                "give either path statistics or an explicit disc, not both",
            )),
        }
    }

    pub fn trajectory(&self) -> Result<TrajectoryModel> {
        TrajectoryModel::new(self.speed_m_per_s()?, self.acceleration_m_per_s2, self.initial_y_m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_frequency_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_frequency_hz: Option<f64>,
    pub path_loss_exponent: f64,
    #[serde(default = "default_gains")]
    pub gains: ReferenceGains,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_ghz: Some(2.6),
            carrier_frequency_hz: None,
            path_loss_exponent: 1.7,
            gains: ReferenceGains::Isotropic,
        }
    }
}

impl RadioConfig {
    pub fn carrier_hz(&self) -> Result<f64> {
        match (self.carrier_frequency_ghz, self.carrier_frequency_hz) {
            (Some(ghz), None) => Ok(ghz * 1e9),
            (None, Some(hz)) => Ok(hz),
            (None, None) => Err(Error::config("radio.carrier_frequency_ghz", "a carrier frequency is required")),
            (Some(_), Some(_)) => Err(Error::config(
                "radio.carrier_frequency_ghz",
                "give the carrier in GHz or in Hz, not both",
            )),
        }
    }

    pub fn params(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.carrier_hz()?, self.path_loss_exponent, self.gains)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Direct,
    #[default]
    Ambit,
    Both,
}

impl Engine {
    pub fn runs_direct(self) -> bool {
        matches!(self, Engine::Direct | Engine::Both)
    }

    pub fn runs_ambit(self) -> bool {
        matches!(self, Engine::Ambit | Engine::Both)
    }
}

fn default_realizations() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub include_los: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub ambit_set: AmbitSetShape,
    #[serde(default)]
    pub delay_quantization: DelayQuantization,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            engine: Engine::default(),
            realizations: default_realizations(),
            base_seed: 0,
            include_los: false,
            workers: None,
            ambit_set: AmbitSetShape::default(),
            delay_quantization: DelayQuantization::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Binary,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            format: OutputFormat::default(),
        }
    }
}

fn default_anchors() -> Vec<f64> {
    vec![0.0, 0.5]
}

fn default_max_lag() -> f64 {
    0.05
}

fn default_window() -> f64 {
    0.5
}

fn default_mass_fraction() -> f64 {
    0.99
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsConfig {
    #[serde(default = "default_anchors")]
    pub anchors_s: Vec<f64>,
    #[serde(default = "default_max_lag")]
    pub max_lag_s: f64,
    #[serde(default = "default_window")]
    pub window_length_s: f64,
    #[serde(default)]
    pub taper: Taper,
    /// Fraction of PSD mass that defines the reported Doppler edge.
    #[serde(default = "default_mass_fraction")]
    pub mass_fraction: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            anchors_s: default_anchors(),
            max_lag_s: default_max_lag(),
            window_length_s: default_window(),
            taper: Taper::default(),
            mass_fraction: default_mass_fraction(),
        }
    }
}

fn default_path_counts() -> Vec<f64> {
    vec![100.0, 1000.0, 5000.0]
}

fn default_bench_realizations() -> usize {
    5
}

fn default_repetitions() -> usize {
    3
}

fn default_bench_horizon() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Values used for both `N_s` and `R_s`.
    #[serde(default = "default_path_counts")]
    pub path_counts: Vec<f64>,
    #[serde(default = "default_bench_realizations")]
    pub realizations: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_bench_horizon")]
    pub t_max_s: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            path_counts: default_path_counts(),
            realizations: default_bench_realizations(),
            repetitions: default_repetitions(),
            t_max_s: default_bench_horizon(),
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scene: SceneConfig,
    pub radio: RadioConfig,
    #[serde(default)]
    pub grid: GridSteps,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub stats: StatsConfig,
    #[serde(default)]
    pub bench: BenchConfig,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every block and builds the scenario once.
    pub fn validate(&self) -> Result<()> {
        self.scenario()?;
        if self.run.realizations == 0 {
            return Err(Error::config("run.realizations", "must be at least 1"));
        }
        if self.run.workers == Some(0) {
            return Err(Error::config("run.workers", "must be at least 1"));
        }
        let s = &self.stats;
        if s.anchors_s.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::config("stats.anchors_s", "anchors must be finite and non-negative"));
        }
        for (field, v) in [("stats.max_lag_s", s.max_lag_s), ("stats.window_length_s", s.window_length_s)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, "must be finite and positive"));
            }
        }
        if !(s.mass_fraction > 0.0 && s.mass_fraction <= 1.0) {
            return Err(Error::config("stats.mass_fraction", "must lie in (0, 1]"));
        }
        if let Taper::Kaiser { beta } = s.taper {
            if !(beta.is_finite() && beta >= 0.0) {
                return Err(Error::config("stats.taper.beta", "must be finite and non-negative"));
            }
        }
        let b = &self.bench;
        if b.path_counts.is_empty() || b.path_counts.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::config("bench.path_counts", "need at least one positive value"));
        }
        if b.realizations == 0 || b.repetitions == 0 {
            return Err(Error::config("bench.realizations", "realizations and repetitions must be at least 1"));
        }
        if !(b.t_max_s.is_finite() && b.t_max_s > 0.0) {
            return Err(Error::config("bench.t_max_s", "must be finite and positive"));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let params = self.radio.params()?;
        let geo = self.scene.geometry()?;
        let traj = self.scene.trajectory()?;
        Scenario::new(params, geo, traj, self.grid)
    }

    /// The scenario with `N_s = R_s = count` and the bench horizon.
    pub fn bench_scenario(&self, count: f64) -> Result<Scenario> {
        let params = self.radio.params()?;
        let v0 = self.scene.speed_m_per_s()?;
        let geo = SceneGeometry::from_path_statistics((self.scene.bs_x_m, self.scene.bs_y_m), count, count, v0)?;
        let traj = self.scene.trajectory()?;
        let steps = GridSteps {
            t_max_s: self.bench.t_max_s,
            ..self.grid
        };
        Scenario::new(params, geo, traj, steps)
    }
}
