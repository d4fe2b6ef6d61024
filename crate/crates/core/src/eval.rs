//! Simulation sweeps: detectability across target positions and detection
//! rate across noise levels, for the full pipeline and single-component
//! baselines.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::Result;
use crate::pipeline::{self, Component, PipelineOutput, Truth};
use crate::sim::{self, ChannelScenario, ImpairmentConfig};

/// Windows whose estimate is within 1 bpm of the truth, per estimator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub windows: usize,
    pub full: usize,
    pub amplitude: usize,
    pub phase: usize,
}

impl Tally {
    fn add(&mut self, other: Tally) {
        self.windows += other.windows;
        self.full += other.full;
        self.amplitude += other.amplitude;
        self.phase += other.phase;
    }

    fn percent(hits: usize, total: usize) -> f64 {
        if total == 0 {
            0.0
        } else {
            100.0 * hits as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionResult {
    pub index: usize,
    /// Change of `d_0` relative to the base scenario, metres.
    pub offset_m: f64,
    pub tally: Tally,
    /// Detectable when more than half of the windows are detected.
    pub full: bool,
    pub amplitude: bool,
    pub phase: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevelResult {
    pub noise_std: f64,
    pub tally: Tally,
    pub full_rate: f64,
    pub amplitude_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scenario: ChannelScenario,
    pub positions: Vec<PositionResult>,
    /// Percentages of detectable positions.
    pub detectability_full: f64,
    pub detectability_amplitude: f64,
    pub detectability_phase: f64,
    pub noise_levels: Vec<NoiseLevelResult>,
}

impl EvaluationReport {
    fn empty(scenario: ChannelScenario) -> Self {
        Self {
            scenario,
            positions: Vec::new(),
            detectability_full: 0.0,
            detectability_amplitude: 0.0,
            detectability_phase: 0.0,
            noise_levels: Vec::new(),
        }
    }

    pub fn positions_csv(&self) -> String {
        let mut out = String::from("index,offset_m,windows,full_hits,amplitude_hits,phase_hits,full,amplitude,phase\n");
        for p in &self.positions {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                p.index, p.offset_m, p.tally.windows, p.tally.full, p.tally.amplitude, p.tally.phase,
                p.full as u8, p.amplitude as u8, p.phase as u8
            )
            .unwrap();
        }
        out
    }

    pub fn noise_csv(&self) -> String {
        let mut out = String::from("noise_std,windows,full_rate,amplitude_rate\n");
        for l in &self.noise_levels {
            writeln!(out, "{},{},{},{}", l.noise_std, l.tally.windows, l.full_rate, l.amplitude_rate).unwrap();
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        format!(
            "metric,value\ndetectability_full,{}\ndetectability_amplitude,{}\ndetectability_phase,{}\n",
            self.detectability_full, self.detectability_amplitude, self.detectability_phase
        )
    }
}

/// Runs the pipeline and both baselines on one simulated trace.
pub fn evaluate_run(
    scenario: &ChannelScenario,
    impairments: &ImpairmentConfig,
    cfg: &Config,
    baselines: bool,
) -> Result<(PipelineOutput, Tally)> {
    let grid = cfg.grid.build();
    let trace = sim::simulate(scenario, &grid, impairments)?;
    let truth = Truth { respiration: &scenario.respiration, duration_s: scenario.duration_s };
    let out = pipeline::run_pipeline(&trace, &cfg.pipeline, Some(truth))?;
    let pair = grid.widest_pair();
    let mut tally = Tally::default();
    for (span, est) in out.plan.windows.iter().zip(&out.estimates) {
        tally.windows += 1;
        tally.full += est.detected() as usize;
        if !baselines {
            continue;
        }
        let window = out.window_trace(span);
        let truth_bpm = est.truth_bpm.unwrap_or(f64::NAN);
        for (component, slot) in [(Component::Amplitude, &mut tally.amplitude), (Component::Phase, &mut tally.phase)] {
            let hit = pipeline::component_estimate(&window, pair, component, &cfg.pipeline)
                .ok()
                .and_then(|e| e.f_bpm)
                .is_some_and(|f| (f - truth_bpm).abs() < 1.0);
            *slot += hit as usize;
        }
    }
    Ok((out, tally))
}

fn sweep_config(cfg: &Config) -> Config {
    let mut c = cfg.clone();
    c.scenario.duration_s = cfg.sweep.duration_s;
    c.pipeline.stride_frames = cfg.sweep.stride_frames;
    c
}

/// Moves the target so that `d_0` spans `sweep.span_m` (one wavelength by
/// default) in `sweep.positions` steps.
pub fn blind_spot_sweep(cfg: &Config) -> Result<EvaluationReport> {
    let c = sweep_config(cfg);
    let grid = c.grid.build();
    let span = c.sweep.span_m.unwrap_or_else(|| {
        let mid = grid.subcarriers().iter().map(|s| s.freq_hz).sum::<f64>() / grid.len() as f64;
        crate::grid::SPEED_OF_LIGHT / mid
    });
    let mut report = EvaluationReport::empty(c.scenario.clone());
    for i in 0..c.sweep.positions {
        let offset_m = span * i as f64 / c.sweep.positions as f64;
        let scenario = ChannelScenario {
            base_dynamic_length_m: c.scenario.base_dynamic_length_m + offset_m,
            ..c.scenario.clone()
        };
        let impairments = ImpairmentConfig { seed: c.impairments.seed.wrapping_add(i as u64), ..c.impairments.clone() };
        let (_, tally) = evaluate_run(&scenario, &impairments, &c, true)?;
        let majority = |hits: usize| tally.windows > 0 && 2 * hits > tally.windows;
        log::info!("position {i}: {tally:?}");
        report.positions.push(PositionResult {
            index: i,
            offset_m,
            tally,
            full: majority(tally.full),
            amplitude: majority(tally.amplitude),
            phase: majority(tally.phase),
        });
    }
    let n = report.positions.len();
    let count = |f: fn(&PositionResult) -> bool| report.positions.iter().filter(|p| f(p)).count();
    report.detectability_full = Tally::percent(count(|p| p.full), n);
    report.detectability_amplitude = Tally::percent(count(|p| p.amplitude), n);
    report.detectability_phase = Tally::percent(count(|p| p.phase), n);
    Ok(report)
}

/// Detection rate per noise level over `sweep.seeds` runs each.
pub fn snr_sweep(cfg: &Config) -> Result<EvaluationReport> {
    let c = sweep_config(cfg);
    let mut report = EvaluationReport::empty(c.scenario.clone());
    for &noise_std in &c.sweep.noise_levels {
        let mut tally = Tally::default();
        for s in 0..c.sweep.seeds {
            let impairments = ImpairmentConfig {
                gaussian_noise_std: noise_std,
                seed: c.impairments.seed.wrapping_add(s as u64),
                ..c.impairments.clone()
            };
            tally.add(evaluate_run(&c.scenario, &impairments, &c, true)?.1);
        }
        log::info!("noise {noise_std}: {tally:?}");
        report.noise_levels.push(NoiseLevelResult {
            noise_std,
            tally,
            full_rate: Tally::percent(tally.full, tally.windows),
            amplitude_rate: Tally::percent(tally.amplitude, tally.windows),
        });
    }
    Ok(report)
}
