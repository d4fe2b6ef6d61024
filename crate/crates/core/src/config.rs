//! TOML configuration tree shared by the library entry points and the CLI.
//!
//! Every table and key is optional; omitted values take the defaults shown
//! by [`Config::default`]. Unknown keys are rejected. A complete example:
//!
//! ```toml
//! grid = "combined"            # "combined" | "ht_ltf" | "l_ltf"
//!
//! [scenario]
//! dynamic_amplitude = 0.1
//! base_dynamic_length_m = 4.5
//! geometric_factor = 2.0
//! sample_rate_hz = 120.0
//! duration_s = 60.0
//! static_paths = [{ amplitude = 1.0, length_m = 2.0 }]
//! respiration = { kind = "sinusoid", rate_bpm = 15.0, depth_m = 0.006, phase_rad = 0.0 }
//!
//! [impairments]
//! pbd_noise_std = 0.002
//! sfo_slope = 0.01
//! cfo = { kind = "random_walk", step_std = 0.05, bound = 3.0 }
//! impulse = { rate_hz = 0.2, level_sigma = 0.3, correlation = 1.0 }
//! gaussian_noise_std = 0.01
//! seed = 7
//!
//! [pipeline]
//! block_s = 0.1
//! motion_threshold_rad = 2.0
//!
//! [pipeline.gass]
//! numerators = 8
//! population = 64
//!
//! [sweep]
//! positions = 32
//! noise_levels = [0.0, 0.01, 0.02]
//! ```

use serde::{Deserialize, Serialize};

use crate::combiner::CombinerParams;
use crate::error::{Error, Result};
use crate::gass::GaParams;
use crate::grid::SubcarrierGrid;
use crate::rate::RateParams;
use crate::sim::{ChannelScenario, ImpairmentConfig};
use crate::waveform::FilterParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridChoice {
    #[default]
    Combined,
    HtLtf,
    LLtf,
}

impl GridChoice {
    pub fn build(self) -> SubcarrierGrid {
        match self {
            GridChoice::Combined => SubcarrierGrid::combined(),
            GridChoice::HtLtf => SubcarrierGrid::ht_ltf(),
            GridChoice::LLtf => SubcarrierGrid::l_ltf(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Phase-averaging block `K1` in seconds (rounded to whole samples).
    pub block_s: f64,
    /// Segmentation frame length in seconds.
    pub frame_s: f64,
    /// Frames per analysis window.
    pub window_frames: usize,
    /// Window stride in frames.
    pub stride_frames: usize,
    pub motion_threshold_rad: f64,
    /// Pair `(m1, m2)` watched for gross motion; defaults to the widest pair.
    pub motion_pair: Option<(usize, usize)>,
    /// Reuse the previous window's GASS solution when the best single-pair
    /// SSNR moved by less than `gass_reuse_tolerance` (relative).
    pub reuse_gass: bool,
    pub gass_reuse_tolerance: f64,
    /// Build streams over denominators that are also numerator indices.
    pub include_numerator_streams: bool,
    pub gass: GaParams,
    pub combiner: CombinerParams,
    pub filter: FilterParams,
    pub rate: RateParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            block_s: 0.1,
            frame_s: 1.0,
            window_frames: 10,
            stride_frames: 1,
            motion_threshold_rad: 2.0,
            motion_pair: None,
            reuse_gass: false,
            gass_reuse_tolerance: 0.1,
            include_numerator_streams: false,
            gass: GaParams::default(),
            combiner: CombinerParams::default(),
            filter: FilterParams::default(),
            rate: RateParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("pipeline.{name} must be positive, got {v}")))
            }
        };
        positive("block_s", self.block_s)?;
        positive("frame_s", self.frame_s)?;
        positive("motion_threshold_rad", self.motion_threshold_rad)?;
        if self.window_frames == 0 || self.stride_frames == 0 {
            return Err(Error::Config("pipeline.window_frames and stride_frames must be >= 1".into()));
        }
        if let Some((a, b)) = self.motion_pair {
            if a == b {
                return Err(Error::Config("pipeline.motion_pair needs distinct subcarriers".into()));
            }
        }
        if !(self.gass_reuse_tolerance.is_finite() && self.gass_reuse_tolerance >= 0.0) {
            return Err(Error::Config("pipeline.gass_reuse_tolerance must be non-negative".into()));
        }
        self.gass.validate()?;
        self.combiner.validate()?;
        self.filter.validate()?;
        self.rate.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Number of target positions in the blind-spot sweep.
    pub positions: usize,
    /// Total change of `d_0` across the sweep; defaults to the grid's
    /// centre wavelength.
    pub span_m: Option<f64>,
    pub duration_s: f64,
    /// Window stride (frames) used by the sweeps.
    pub stride_frames: usize,
    pub noise_levels: Vec<f64>,
    /// Monte Carlo repetitions per noise level.
    pub seeds: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            positions: 32,
            span_m: None,
            duration_s: 30.0,
            stride_frames: 5,
            noise_levels: vec![0.0, 0.005, 0.01, 0.02, 0.04],
            seeds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: GridChoice,
    pub scenario: ChannelScenario,
    pub impairments: ImpairmentConfig,
    pub pipeline: PipelineConfig,
    pub sweep: SweepConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.impairments.validate()?;
        self.pipeline.validate()?;
        if self.sweep.positions < 2 {
            return Err(Error::Config("sweep.positions must be at least 2".into()));
        }
        if !(self.sweep.duration_s.is_finite() && self.sweep.duration_s > 0.0) {
            return Err(Error::Config("sweep.duration_s must be positive".into()));
        }
        if self.sweep.span_m.is_some_and(|s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::Config("sweep.span_m must be positive".into()));
        }
        if self.sweep.stride_frames == 0 {
            return Err(Error::Config("sweep.stride_frames must be >= 1".into()));
        }
        if self.sweep.noise_levels.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("sweep.noise_levels must be non-negative".into()));
        }
        if self.sweep.noise_levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("sweep.noise_levels must be non-decreasing".into()));
        }
        Ok(())
    }
}
