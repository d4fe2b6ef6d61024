//! Synthetic CSI: ideal multipath channel plus hardware impairments.
//!
//! The ideal channel of subcarrier `m` at sample `k` is a static sum
//! `Σ_p A_S,p(m)·e^{-j2π d_S,p/λ_m}` plus one chest-reflected path
//! `A_D(m)·e^{-j2π d_D(k)/λ_m}` with `d_D(k) = d_0 + g·Δd(k)`, where `Δd` is
//! the chest displacement and `g` the displacement-to-path-length factor.
//!
//! The measured channel is
//! `H̃ = A_n·e^{-j[n(m)(η_b(k)+η_o) + φ(k)]}·H + ε`, with PBD jitter `η_b`,
//! SFO slope `η_o`, CFO phase `φ`, impulse level `A_n` and complex Gaussian
//! noise `ε`. Every random component draws from its own ChaCha stream so
//! that switching one component off leaves the others' draws unchanged.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SubcarrierGrid;

/// Largest physiological chest displacement accepted, in metres.
pub const MAX_DISPLACEMENT_M: f64 = 0.012;

const STREAM_PBD: u64 = 1;
const STREAM_CFO: u64 = 2;
const STREAM_IMPULSE: u64 = 3;
const STREAM_NOISE: u64 = 4;
const STREAM_RIPPLE: u64 = 5;

/// One time instant of CSI across the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiFrame {
    pub k: usize,
    pub timestamp_s: f64,
    pub values: Vec<Complex64>,
}

/// A frame sequence with the grid and rate it was captured on.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiTrace {
    pub grid: SubcarrierGrid,
    pub sample_rate_hz: f64,
    pub frames: Vec<CsiFrame>,
}

impl CsiTrace {
    pub fn new(grid: SubcarrierGrid, sample_rate_hz: f64, frames: Vec<CsiFrame>) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Config(format!("invalid sample rate {sample_rate_hz}")));
        }
        for f in &frames {
            if f.values.len() != grid.len() {
                return Err(Error::Format(format!(
                    "frame {} has {} values, grid has {}",
                    f.k,
                    f.values.len(),
                    grid.len()
                )));
            }
            if f.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::Format(format!("frame {} has non-finite values", f.k)));
            }
        }
        Ok(Self { grid, sample_rate_hz, frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Time series of one subcarrier.
    pub fn column(&self, m: usize) -> Vec<Complex64> {
        self.frames.iter().map(|f| f.values[m]).collect()
    }

    /// Frames `range`, renumbered from zero.
    pub fn slice(&self, range: std::ops::Range<usize>) -> CsiTrace {
        let frames = self.frames[range]
            .iter()
            .enumerate()
            .map(|(i, f)| CsiFrame { k: i, ..f.clone() })
            .collect();
        CsiTrace {
            grid: self.grid.clone(),
            sample_rate_hz: self.sample_rate_hz,
            frames,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticPath {
    pub amplitude: f64,
    pub length_m: f64,
}

/// Per-subcarrier gain shape applied on top of a path's amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmplitudeProfile {
    #[default]
    Flat,
    /// Smooth random ripple `1 + depth·r(f)` with `|r| ≤ 1`.
    Ripple { depth: f64, seed: u64 },
}

/// Chest displacement waveform. `depth_m` is the peak-to-peak excursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Respiration {
    Sinusoid {
        rate_bpm: f64,
        depth_m: f64,
        #[serde(default)]
        phase_rad: f64,
    },
    /// Linear frequency sweep from `start_bpm` to `end_bpm` over the run.
    Chirp {
        start_bpm: f64,
        end_bpm: f64,
        depth_m: f64,
    },
    /// Piecewise-constant rate: `(start_s, rate_bpm)` segments, phase-continuous.
    Steps {
        segments: Vec<(f64, f64)>,
        depth_m: f64,
    },
}

impl Default for Respiration {
    fn default() -> Self {
        Respiration::Sinusoid { rate_bpm: 15.0, depth_m: 0.006, phase_rad: 0.0 }
    }
}

impl Respiration {
    fn depth(&self) -> f64 {
        match self {
            Respiration::Sinusoid { depth_m, .. }
            | Respiration::Chirp { depth_m, .. }
            | Respiration::Steps { depth_m, .. } => *depth_m,
        }
    }

    /// Instantaneous rate at time `t`, in breaths per minute.
    pub fn rate_bpm_at(&self, t: f64, duration_s: f64) -> f64 {
        match self {
            Respiration::Sinusoid { rate_bpm, .. } => *rate_bpm,
            Respiration::Chirp { start_bpm, end_bpm, .. } => {
                let frac = if duration_s > 0.0 { (t / duration_s).clamp(0.0, 1.0) } else { 0.0 };
                start_bpm + (end_bpm - start_bpm) * frac
            }
            Respiration::Steps { segments, .. } => segments
                .iter()
                .take_while(|(start, _)| *start <= t)
                .last()
                .or(segments.first())
                .map_or(0.0, |s| s.1),
        }
    }

    /// Mean rate over `[t0, t1)`, used as ground truth for a window.
    pub fn mean_rate_bpm(&self, t0: f64, t1: f64, duration_s: f64) -> f64 {
        let n = 64;
        (0..n)
            .map(|i| self.rate_bpm_at(t0 + (t1 - t0) * (i as f64 + 0.5) / n as f64, duration_s))
            .sum::<f64>()
            / n as f64
    }

    /// Displacement series in metres at `count` samples of rate `fs`.
    pub fn displacement(&self, count: usize, fs: f64) -> Vec<f64> {
        let half = 0.5 * self.depth();
        let duration = count as f64 / fs;
        match self {
            Respiration::Sinusoid { rate_bpm, phase_rad, .. } => (0..count)
                .map(|k| {
                    let t = k as f64 / fs;
                    half * (2.0 * PI * rate_bpm / 60.0 * t + phase_rad).sin()
                })
                .collect(),
            Respiration::Chirp { .. } | Respiration::Steps { .. } => {
                let mut phase: f64 = 0.0;
                (0..count)
                    .map(|k| {
                        let t = k as f64 / fs;
                        let v = half * phase.sin();
                        phase += 2.0 * PI * self.rate_bpm_at(t, duration) / 60.0 / fs;
                        v
                    })
                    .collect()
            }
        }
    }
}

/// Full parameterisation of the simulated propagation environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelScenario {
    pub static_paths: Vec<StaticPath>,
    pub static_profile: AmplitudeProfile,
    pub dynamic_amplitude: f64,
    pub dynamic_profile: AmplitudeProfile,
    /// Reflected path length `d_0` at rest, metres.
    pub base_dynamic_length_m: f64,
    /// Path-length change per metre of chest displacement.
    pub geometric_factor: f64,
    pub respiration: Respiration,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
}

impl Default for ChannelScenario {
    fn default() -> Self {
        Self {
            static_paths: vec![StaticPath { amplitude: 1.0, length_m: 2.0 }],
            static_profile: AmplitudeProfile::Flat,
            dynamic_amplitude: 0.1,
            dynamic_profile: AmplitudeProfile::Flat,
            base_dynamic_length_m: 4.5,
            geometric_factor: 2.0,
            respiration: Respiration::default(),
            sample_rate_hz: 120.0,
            duration_s: 60.0,
        }
    }
}

impl ChannelScenario {
    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return bad(format!("sample rate must be positive, got {}", self.sample_rate_hz));
        }
        if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
            return bad(format!("duration must be non-negative, got {}", self.duration_s));
        }
        if self.sample_count() > 50_000_000 {
            return bad("scenario is too long".into());
        }
        for p in &self.static_paths {
            if !(p.length_m.is_finite() && p.length_m > 0.0) {
                return bad(format!("static path length must be positive, got {}", p.length_m));
            }
            if !(p.amplitude.is_finite() && p.amplitude >= 0.0) {
                return bad(format!("static amplitude must be non-negative, got {}", p.amplitude));
            }
        }
        if !(self.dynamic_amplitude.is_finite() && self.dynamic_amplitude >= 0.0) {
            return bad(format!(
                "dynamic amplitude must be non-negative, got {}",
                self.dynamic_amplitude
            ));
        }
        if !self.geometric_factor.is_finite() || self.geometric_factor < 0.0 {
            return bad(format!("invalid geometric factor {}", self.geometric_factor));
        }
        for profile in [self.static_profile, self.dynamic_profile] {
            if let AmplitudeProfile::Ripple { depth, .. } = profile {
                if !(0.0..1.0).contains(&depth) {
                    return bad(format!("ripple depth must be in [0, 1), got {depth}"));
                }
            }
        }
        let depth = self.respiration.depth();
        if !(depth.is_finite() && depth >= 0.0 && 0.5 * depth <= MAX_DISPLACEMENT_M) {
            return bad(format!("chest displacement depth {depth} m out of range"));
        }
        let rates: Vec<f64> = match &self.respiration {
            Respiration::Sinusoid { rate_bpm, phase_rad, .. } => {
                if !phase_rad.is_finite() {
                    return bad("respiration phase must be finite".into());
                }
                vec![*rate_bpm]
            }
            Respiration::Chirp { start_bpm, end_bpm, .. } => vec![*start_bpm, *end_bpm],
            Respiration::Steps { segments, .. } => {
                if segments.is_empty() {
                    return bad("rate steps need at least one segment".into());
                }
                if segments.iter().any(|s| !s.0.is_finite()) {
                    return bad("rate step start times must be finite".into());
                }
                segments.iter().map(|s| s.1).collect()
            }
        };
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0 && *r <= 600.0)) {
            return bad(format!("respiration rates out of range: {rates:?}"));
        }
        let min_path = self.base_dynamic_length_m - self.geometric_factor * 0.5 * depth;
        if !(self.base_dynamic_length_m.is_finite() && min_path > 0.0) {
            return bad(format!(
                "dynamic path length must stay positive (d_0 = {})",
                self.base_dynamic_length_m
            ));
        }
        Ok(())
    }

    /// Chest displacement `Δd(k)` in metres.
    pub fn displacement(&self) -> Vec<f64> {
        self.respiration.displacement(self.sample_count(), self.sample_rate_hz)
    }

    /// Reflected path length `d_D(k)` in metres.
    pub fn dynamic_path_length(&self) -> Vec<f64> {
        self.displacement()
            .iter()
            .map(|d| self.base_dynamic_length_m + self.geometric_factor * d)
            .collect()
    }

    /// Static component `H_S(m)` for every subcarrier.
    pub fn static_component(&self, grid: &SubcarrierGrid) -> Vec<Complex64> {
        let gains = profile_gains(self.static_profile, grid);
        (0..grid.len())
            .map(|m| {
                let lambda = grid.wavelength(m);
                self.static_paths
                    .iter()
                    .map(|p| {
                        Complex64::from_polar(p.amplitude * gains[m], -2.0 * PI * p.length_m / lambda)
                    })
                    .sum()
            })
            .collect()
    }

    /// Dynamic amplitude `A_D(m)` for every subcarrier.
    pub fn dynamic_amplitudes(&self, grid: &SubcarrierGrid) -> Vec<f64> {
        profile_gains(self.dynamic_profile, grid)
            .iter()
            .map(|g| g * self.dynamic_amplitude)
            .collect()
    }

    /// Static path amplitude `A_S(m)` summed over paths (for diagnostics).
    pub fn static_amplitudes(&self, grid: &SubcarrierGrid) -> Vec<f64> {
        let total: f64 = self.static_paths.iter().map(|p| p.amplitude).sum();
        profile_gains(self.static_profile, grid).iter().map(|g| g * total).collect()
    }
}

fn profile_gains(profile: AmplitudeProfile, grid: &SubcarrierGrid) -> Vec<f64> {
    match profile {
        AmplitudeProfile::Flat => vec![1.0; grid.len()],
        AmplitudeProfile::Ripple { depth, seed } => {
            let mut rng = stream_rng(seed, STREAM_RIPPLE);
            // Three random harmonics across the 40 MHz band.
            let terms: Vec<(f64, f64)> = (1..=3)
                .map(|h| (h as f64, rng.random_range(0.0..2.0 * PI)))
                .collect();
            grid.subcarriers()
                .iter()
                .map(|sc| {
                    let x = (sc.freq_hz - crate::grid::CHANNEL_11_40MHZ_CENTER_HZ) / 40.0e6;
                    let r: f64 = terms
                        .iter()
                        .map(|(h, ph)| (2.0 * PI * h * x + ph).sin())
                        .sum::<f64>()
                        / terms.len() as f64;
                    1.0 + depth * r
                })
                .collect()
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Ideal CSI of the scenario on `grid`.
pub fn generate_ideal_csi(scenario: &ChannelScenario, grid: &SubcarrierGrid) -> Result<CsiTrace> {
    scenario.validate()?;
    if grid.is_empty() {
        return Err(Error::Config("subcarrier grid is empty".into()));
    }
    let hs = scenario.static_component(grid);
    let ad = scenario.dynamic_amplitudes(grid);
    let inv_lambda: Vec<f64> = (0..grid.len()).map(|m| 1.0 / grid.wavelength(m)).collect();
    let fs = scenario.sample_rate_hz;
    let frames = scenario
        .dynamic_path_length()
        .iter()
        .enumerate()
        .map(|(k, d)| CsiFrame {
            k,
            timestamp_s: k as f64 / fs,
            values: (0..grid.len())
                .map(|m| hs[m] + Complex64::from_polar(ad[m], -2.0 * PI * d * inv_lambda[m]))
                .collect(),
        })
        .collect();
    CsiTrace::new(grid.clone(), fs, frames)
}

/// Dynamic component `H_D(m,k)` for every subcarrier (outer) and sample.
pub fn dynamic_component(scenario: &ChannelScenario, grid: &SubcarrierGrid) -> Vec<Vec<Complex64>> {
    let ad = scenario.dynamic_amplitudes(grid);
    let d = scenario.dynamic_path_length();
    (0..grid.len())
        .map(|m| {
            let lambda = grid.wavelength(m);
            d.iter()
                .map(|dk| Complex64::from_polar(ad[m], -2.0 * PI * dk / lambda))
                .collect()
        })
        .collect()
}

/// Fresnel phase `angle(H_S) - angle(H_D)` wrapped to `(-π, π]`.
pub fn fresnel_phase_of(hs: Complex64, hd: Complex64) -> Option<f64> {
    if hd.norm() == 0.0 || hs.norm() == 0.0 {
        return None;
    }
    Some((hs * hd.conj()).arg())
}

/// Fresnel phase series `ρ_fn(m,k)` from the scenario's own decomposition,
/// unwrapped over time per subcarrier.
pub fn fresnel_phase(scenario: &ChannelScenario, grid: &SubcarrierGrid) -> Result<Vec<Vec<f64>>> {
    scenario.validate()?;
    let hs = scenario.static_component(grid);
    dynamic_component(scenario, grid)
        .iter()
        .enumerate()
        .map(|(m, series)| {
            let raw = series
                .iter()
                .enumerate()
                .map(|(k, hd)| fresnel_phase_of(hs[m], *hd).ok_or(Error::UndefinedPhase { k }))
                .collect::<Result<Vec<f64>>>()?;
            Ok(crate::dsp::unwrap(&raw))
        })
        .collect()
}

/// Carrier frequency offset phase model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CfoModel {
    #[default]
    None,
    Constant { phase_rad: f64 },
    /// Gaussian-step random walk reflected into `[-bound, bound]`.
    RandomWalk { step_std: f64, bound: f64 },
}

/// Multiplicative amplitude impulse process.
///
/// Jump times are Poisson with rate `rate_hz`; each segment's log-level is
/// `N(0, level_sigma²)`. A subcarrier's log-level is
/// `c·common + sqrt(1-c²)·own` for correlation `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpulseModel {
    pub rate_hz: f64,
    pub level_sigma: f64,
    pub correlation: f64,
}

impl Default for ImpulseModel {
    fn default() -> Self {
        Self { rate_hz: 0.0, level_sigma: 0.0, correlation: 1.0 }
    }
}

impl ImpulseModel {
    fn is_identity(&self) -> bool {
        self.rate_hz == 0.0 || self.level_sigma == 0.0
    }
}

/// Gross body motion injected as a transient delay shift: an extra phase
/// `n(m)·s(k)` where `s` rises linearly to `peak_slope_rad` at the middle
/// of the interval and returns to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionArtifact {
    pub start_s: f64,
    pub duration_s: f64,
    pub peak_slope_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpairmentConfig {
    /// Std of the per-frame PBD error `η_b`, radians per physical index.
    pub pbd_noise_std: f64,
    /// SFO slope `η_o`, radians per physical index.
    pub sfo_slope: f64,
    pub cfo: CfoModel,
    pub impulse: ImpulseModel,
    /// Per-component std of the complex noise `ε`.
    pub gaussian_noise_std: f64,
    pub motion_artifacts: Vec<MotionArtifact>,
    pub seed: u64,
}

impl ImpairmentConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be finite and non-negative, got {v}")))
            }
        };
        nonneg("pbd_noise_std", self.pbd_noise_std)?;
        nonneg("gaussian_noise_std", self.gaussian_noise_std)?;
        nonneg("impulse.rate_hz", self.impulse.rate_hz)?;
        nonneg("impulse.level_sigma", self.impulse.level_sigma)?;
        if !self.sfo_slope.is_finite() {
            return Err(Error::Config("sfo_slope must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.impulse.correlation) {
            return Err(Error::Config(format!(
                "impulse correlation must be in [0, 1], got {}",
                self.impulse.correlation
            )));
        }
        match self.cfo {
            CfoModel::None => {}
            CfoModel::Constant { phase_rad } => {
                if !phase_rad.is_finite() {
                    return Err(Error::Config("CFO phase must be finite".into()));
                }
            }
            CfoModel::RandomWalk { step_std, bound } => {
                nonneg("cfo.step_std", step_std)?;
                if !(bound.is_finite() && bound > 0.0) {
                    return Err(Error::Config(format!("CFO bound must be positive, got {bound}")));
                }
            }
        }
        for a in &self.motion_artifacts {
            if !(a.start_s.is_finite() && a.duration_s.is_finite() && a.duration_s > 0.0)
                || !a.peak_slope_rad.is_finite()
            {
                return Err(Error::Config(format!("invalid motion artifact {a:?}")));
            }
        }
        Ok(())
    }

    /// Per-frame PBD error `η_b(k)`.
    pub fn pbd_series(&self, count: usize) -> Vec<f64> {
        if self.pbd_noise_std == 0.0 {
            return vec![0.0; count];
        }
        let mut rng = stream_rng(self.seed, STREAM_PBD);
        let normal = Normal::new(0.0, self.pbd_noise_std).expect("validated std");
        (0..count).map(|_| normal.sample(&mut rng)).collect()
    }

    /// CFO phase `φ(k)`.
    pub fn cfo_series(&self, count: usize) -> Vec<f64> {
        match self.cfo {
            CfoModel::None => vec![0.0; count],
            CfoModel::Constant { phase_rad } => vec![phase_rad; count],
            CfoModel::RandomWalk { step_std, bound } => {
                let mut rng = stream_rng(self.seed, STREAM_CFO);
                let normal = Normal::new(0.0, step_std).expect("validated std");
                let mut phi: f64 = 0.0;
                (0..count)
                    .map(|_| {
                        let out = phi;
                        phi += normal.sample(&mut rng);
                        // Reflect back into the band.
                        while phi.abs() > bound {
                            phi = phi.signum() * 2.0 * bound - phi;
                        }
                        out
                    })
                    .collect()
            }
        }
    }

    /// Impulse levels `A_n(m,k)`, indexed `[k][m]`; `None` when identically 1.
    pub fn impulse_levels(
        &self,
        count: usize,
        subcarriers: usize,
        sample_rate: f64,
    ) -> Option<Vec<Vec<f64>>> {
        let model = self.impulse;
        if model.is_identity() {
            return None;
        }
        let mut rng = stream_rng(self.seed, STREAM_IMPULSE);
        let gap_s = Exp::new(model.rate_hz).expect("validated rate");
        let level = Normal::new(0.0, model.level_sigma).expect("validated sigma");
        let c = model.correlation;
        let own_weight = (1.0 - c * c).max(0.0).sqrt();
        let mut out = Vec::with_capacity(count);
        let mut next_jump = 0.0;
        let (mut common, mut own) = (0.0, vec![0.0; subcarriers]);
        for k in 0..count {
            while k as f64 >= next_jump {
                common = level.sample(&mut rng);
                if c < 1.0 {
                    for o in own.iter_mut() {
                        *o = level.sample(&mut rng);
                    }
                }
                let gap: f64 = gap_s.sample(&mut rng);
                next_jump += (gap * sample_rate).max(1e-6);
            }
            let row = if c == 1.0 {
                vec![f64::exp(common); subcarriers]
            } else {
                own.iter().map(|o| f64::exp(c * common + own_weight * o)).collect()
            };
            out.push(row);
        }
        Some(out)
    }
}

/// Phase added by motion artifacts at each sample, per unit physical index.
fn artifact_slopes(artifacts: &[MotionArtifact], count: usize, fs: f64) -> Option<Vec<f64>> {
    if artifacts.is_empty() {
        return None;
    }
    let mut slope = vec![0.0; count];
    for a in artifacts {
        for (k, s) in slope.iter_mut().enumerate() {
            let u = (k as f64 / fs - a.start_s) / a.duration_s;
            if (0.0..=1.0).contains(&u) {
                *s += a.peak_slope_rad * (1.0 - (2.0 * u - 1.0).abs());
            }
        }
    }
    Some(slope)
}

/// Corrupts an ideal trace with the configured hardware impairments.
pub fn apply_impairments(ideal: &CsiTrace, cfg: &ImpairmentConfig) -> Result<CsiTrace> {
    cfg.validate()?;
    let count = ideal.len();
    let m_count = ideal.grid.len();
    let fs = ideal.sample_rate_hz;
    let n: Vec<f64> = (0..m_count).map(|m| f64::from(ideal.grid.physical_index(m))).collect();
    let pbd = cfg.pbd_series(count);
    let cfo = cfg.cfo_series(count);
    let impulses = cfg.impulse_levels(count, m_count, fs);
    let artifacts = artifact_slopes(&cfg.motion_artifacts, count, fs);
    let phase_free = cfg.pbd_noise_std == 0.0
        && cfg.sfo_slope == 0.0
        && matches!(cfg.cfo, CfoModel::None)
        && artifacts.is_none();

    let mut noise_rng = stream_rng(cfg.seed, STREAM_NOISE);
    let noise = (cfg.gaussian_noise_std > 0.0)
        .then(|| Normal::new(0.0, cfg.gaussian_noise_std).expect("validated std"));

    let frames = ideal
        .frames
        .iter()
        .enumerate()
        .map(|(k, frame)| {
            let slope = pbd[k] + cfg.sfo_slope + artifacts.as_ref().map_or(0.0, |a| a[k]);
            let values = frame
                .values
                .iter()
                .enumerate()
                .map(|(m, h)| {
                    let mut v = *h;
                    if !phase_free {
                        v *= Complex64::from_polar(1.0, -(n[m] * slope + cfo[k]));
                    }
                    if let Some(levels) = &impulses {
                        v *= levels[k][m];
                    }
                    if let Some(dist) = &noise {
                        v += Complex64::new(dist.sample(&mut noise_rng), dist.sample(&mut noise_rng));
                    }
                    v
                })
                .collect();
            CsiFrame { k: frame.k, timestamp_s: frame.timestamp_s, values }
        })
        .collect();
    CsiTrace::new(ideal.grid.clone(), fs, frames)
}

/// Ideal generation followed by impairments.
pub fn simulate(
    scenario: &ChannelScenario,
    grid: &SubcarrierGrid,
    cfg: &ImpairmentConfig,
) -> Result<CsiTrace> {
    apply_impairments(&generate_ideal_csi(scenario, grid)?, cfg)
}
