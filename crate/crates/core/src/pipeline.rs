//! End-to-end processing: phase averaging, motion segmentation, then per
//! window GASS, stream combination, projection, filtering and rate
//! estimation.
//!
//! Everything after averaging runs at the block rate `F_s/K1`.

use serde::{Deserialize, Serialize};

use crate::combiner;
use crate::config::PipelineConfig;
use crate::cscr;
use crate::error::{Error, Result};
use crate::gass::{self, FitnessContext, GassGenome, GassSolution};
use crate::rate::{self, RateFlag, RespirationEstimate};
use crate::sim::{CsiTrace, Respiration};
use crate::ssnr::{self, SsnrEstimate};
use crate::waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpan {
    pub id: usize,
    pub first_frame: usize,
    pub start_sample: usize,
    pub end_sample: usize,
}

/// Frame acceptance and the windows assembled from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub sample_rate_hz: f64,
    pub frame_samples: usize,
    pub window_frames: usize,
    pub stride_frames: usize,
    pub motion_threshold_rad: f64,
    pub motion_pair: (usize, usize),
    /// Largest phase change of the watched pair within each frame.
    pub frame_motion: Vec<f64>,
    pub accepted: Vec<bool>,
    pub windows: Vec<WindowSpan>,
}

impl WindowPlan {
    pub fn window_samples(&self) -> usize {
        self.frame_samples * self.window_frames
    }
}

/// Splits `trace` (already block-averaged) into frames, rejects frames whose
/// pair phase moves by more than the threshold, and lays windows over runs
/// of consecutive accepted frames.
pub fn segment(trace: &CsiTrace, cfg: &PipelineConfig) -> Result<WindowPlan> {
    let fs = trace.sample_rate_hz;
    let frame_samples = ((cfg.frame_s * fs).round() as usize).max(1);
    let motion_pair = cfg.motion_pair.unwrap_or_else(|| trace.grid.widest_pair());
    let n_frames = trace.len() / frame_samples;
    let mut frame_motion = Vec::with_capacity(n_frames);
    if n_frames > 0 {
        let phase = cscr::cscr(trace, motion_pair.0, motion_pair.1)?.phase();
        for f in 0..n_frames {
            // Include the last sample of the previous frame so that a jump on
            // the boundary is charged to the later frame.
            let lo = (f * frame_samples).saturating_sub(1);
            let seg = &phase[lo..(f + 1) * frame_samples];
            let (min, max) = seg.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            frame_motion.push(max - min);
        }
    }
    let accepted: Vec<bool> = frame_motion.iter().map(|m| *m <= cfg.motion_threshold_rad).collect();
    let mut windows = Vec::new();
    let mut first = 0;
    while first + cfg.window_frames <= n_frames {
        if accepted[first..first + cfg.window_frames].iter().all(|a| *a) {
            windows.push(WindowSpan {
                id: windows.len(),
                first_frame: first,
                start_sample: first * frame_samples,
                end_sample: (first + cfg.window_frames) * frame_samples,
            });
        }
        first += cfg.stride_frames;
    }
    Ok(WindowPlan {
        sample_rate_hz: fs,
        frame_samples,
        window_frames: cfg.window_frames,
        stride_frames: cfg.stride_frames,
        motion_threshold_rad: cfg.motion_threshold_rad,
        motion_pair,
        frame_motion,
        accepted,
        windows,
    })
}

/// Everything needed to recompute a window's estimate without the GA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub genome: GassGenome,
    pub gass_fitness: SsnrEstimate,
    pub gass_generation_found: usize,
    pub gass_reused: bool,
    pub streams: usize,
    pub contributing_streams: usize,
    pub reference_stream: usize,
    #[serde(with = "crate::float_repr")]
    pub ssnr_combined: f64,
    #[serde(with = "crate::float_repr")]
    pub ssnr_smoothed: f64,
    pub projection_theta: f64,
    #[serde(with = "crate::float_repr")]
    pub ssnr_projected: f64,
    #[serde(with = "crate::float_repr")]
    pub ssnr_filtered: f64,
    pub hampel_replacements: usize,
    pub peak_index_1: usize,
    pub peak_index_2: Option<usize>,
    pub lag_samples: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    pub window_id: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub f_bpm: Option<f64>,
    pub confidence: f64,
    /// `ok`, `no_peak`, `out_of_band` or `error`.
    pub flags: Vec<String>,
    /// Why the window has no estimate, when a stage failed.
    pub reason: Option<String>,
    pub truth_bpm: Option<f64>,
    pub provenance: Option<Provenance>,
}

impl WindowEstimate {
    pub fn error_bpm(&self) -> Option<f64> {
        Some((self.f_bpm? - self.truth_bpm?).abs())
    }

    /// Estimate within 1 bpm of the ground truth.
    pub fn detected(&self) -> bool {
        self.error_bpm().is_some_and(|e| e < 1.0)
    }
}

/// Intermediate products of the post-GASS chain for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowProducts {
    pub combined: combiner::CombinedSignal,
    pub projected: waveform::ProjectedWaveform,
    pub filtered: waveform::FilteredWaveform,
    pub estimate: RespirationEstimate,
    pub streams: usize,
}

/// Streams, combination, projection, filters and rate for a fixed genome.
pub fn process_window(window: &CsiTrace, genome: &GassGenome, cfg: &PipelineConfig) -> Result<WindowProducts> {
    let streams = gass::build_streams(genome, window, cfg.include_numerator_streams)?;
    let (combined, _) = combiner::combine(&streams, &cfg.combiner)?;
    let projected = waveform::project(&combined.smoothed, combined.sample_rate_hz)?;
    let filtered = waveform::clean(&projected.values, combined.sample_rate_hz, &cfg.filter)?;
    let estimate = rate::estimate_rate(&filtered.values, combined.sample_rate_hz, &cfg.rate)?;
    Ok(WindowProducts { combined, projected, filtered, estimate, streams: streams.len() })
}

fn flag_name(flag: RateFlag) -> &'static str {
    match flag {
        RateFlag::Ok => "ok",
        RateFlag::NoPeak => "no_peak",
        RateFlag::OutOfBand => "out_of_band",
    }
}

fn provenance(solution: &GassSolution, reused: bool, p: &WindowProducts) -> Result<Provenance> {
    let fs = p.combined.sample_rate_hz;
    Ok(Provenance {
        genome: solution.genome.clone(),
        gass_fitness: solution.fitness,
        gass_generation_found: solution.generation_found,
        gass_reused: reused,
        streams: p.streams,
        contributing_streams: p.combined.contributing_streams,
        reference_stream: p.combined.reference,
        ssnr_combined: ssnr::ssnr_complex(&p.combined.combined, fs)?.value,
        ssnr_smoothed: ssnr::ssnr_complex(&p.combined.smoothed, fs)?.value,
        projection_theta: p.projected.theta,
        ssnr_projected: p.projected.ssnr.value,
        ssnr_filtered: ssnr::ssnr_real(&p.filtered.values, fs)?.value,
        hampel_replacements: p.filtered.hampel_replacements,
        peak_index_1: p.estimate.peak_index_1,
        peak_index_2: p.estimate.peak_index_2,
        lag_samples: p.estimate.lag_samples,
    })
}

/// Ground truth for windows of a simulated run.
#[derive(Debug, Clone, Copy)]
pub struct Truth<'a> {
    pub respiration: &'a Respiration,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub block_size: usize,
    pub averaged: CsiTrace,
    pub plan: WindowPlan,
    pub estimates: Vec<WindowEstimate>,
    /// GASS solution of every window that ran the GA (for audit).
    pub solutions: Vec<(usize, GassSolution)>,
}

impl PipelineOutput {
    pub fn no_window(&self) -> bool {
        self.plan.windows.is_empty()
    }

    pub fn window_trace(&self, span: &WindowSpan) -> CsiTrace {
        self.averaged.slice(span.start_sample..span.end_sample)
    }

    pub fn to_jsonl(&self) -> String {
        self.estimates
            .iter()
            .map(|e| serde_json::to_string(e).expect("estimate serialises") + "\n")
            .collect()
    }
}

pub fn block_size(sample_rate_hz: f64, cfg: &PipelineConfig) -> usize {
    ((cfg.block_s * sample_rate_hz).round() as usize).max(1)
}

/// Runs every stage over `trace`. Stage failures inside a window become a
/// no-estimate record with a reason; only invalid configuration aborts.
pub fn run_pipeline(trace: &CsiTrace, cfg: &PipelineConfig, truth: Option<Truth>) -> Result<PipelineOutput> {
    cfg.validate()?;
    let k1 = block_size(trace.sample_rate_hz, cfg);
    let averaged = if trace.len() < k1 {
        trace.slice(0..0)
    } else {
        cscr::average_phase_blocks(trace, k1)?
    };
    let averaged = CsiTrace { sample_rate_hz: trace.sample_rate_hz / k1 as f64, ..averaged };
    let plan = segment(&averaged, cfg)?;
    let fs = averaged.sample_rate_hz;

    let mut estimates = Vec::with_capacity(plan.windows.len());
    let mut solutions = Vec::new();
    let mut previous: Option<(GassSolution, f64)> = None;
    for span in &plan.windows {
        let window = averaged.slice(span.start_sample..span.end_sample);
        let t_start = averaged.frames[span.start_sample].timestamp_s;
        let t_end = t_start + (span.end_sample - span.start_sample) as f64 / fs;
        let truth_bpm = truth.map(|t| t.respiration.mean_rate_bpm(t_start, t_end, t.duration_s));
        let mut record = WindowEstimate {
            window_id: span.id,
            t_start,
            t_end,
            f_bpm: None,
            confidence: 0.0,
            flags: Vec::new(),
            reason: None,
            truth_bpm,
            provenance: None,
        };
        let outcome = (|| -> Result<(GassSolution, WindowProducts, Provenance)> {
            let mut ctx = FitnessContext::new(&window)?;
            let (solution, reused) = match (&previous, cfg.reuse_gass) {
                (Some((prev, prev_pair)), true) => {
                    let best_pair = gass::rank_single_pairs(&mut ctx, cfg.gass.seed_denominator_stride, 1)
                        .first()
                        .map_or(0.0, |p| p.1.value);
                    let change = (best_pair - prev_pair).abs() / prev_pair.abs().max(f64::MIN_POSITIVE);
                    if change < cfg.gass_reuse_tolerance {
                        let fitness = ctx.evaluate(&prev.genome);
                        (GassSolution { fitness, history: vec![fitness.value], ..prev.clone() }, true)
                    } else {
                        (gass::optimize_with(&mut ctx, &window_params(cfg, span.id), &[])?, false)
                    }
                }
                _ => (gass::optimize_with(&mut ctx, &window_params(cfg, span.id), &[])?, false),
            };
            let products = process_window(&window, &solution.genome, cfg)?;
            let prov = provenance(&solution, reused, &products)?;
            Ok((solution, products, prov))
        })();
        match outcome {
            Ok((solution, products, prov)) => {
                let reused = prov.gass_reused;
                record.f_bpm = products.estimate.f_bpm;
                record.confidence = products.estimate.confidence;
                record.flags.push(flag_name(products.estimate.flag).into());
                record.provenance = Some(prov);
                if !reused {
                    // Without seeding there is no pair baseline and reuse never triggers.
                    previous = Some((solution.clone(), solution.best_seed_fitness.max(0.0)));
                    solutions.push((span.id, solution));
                }
            }
            Err(e) => {
                log::warn!("window {} produced no estimate: {e}", span.id);
                record.flags.push("error".into());
                record.reason = Some(e.to_string());
            }
        }
        estimates.push(record);
    }
    Ok(PipelineOutput { block_size: k1, averaged, plan, estimates, solutions })
}

fn window_params(cfg: &PipelineConfig, window_id: usize) -> gass::GaParams {
    gass::GaParams { seed: cfg.gass.seed.wrapping_add(window_id as u64), ..cfg.gass.clone() }
}

/// Recomputes a window's estimate from its recorded genome.
pub fn rerun_window(window: &CsiTrace, provenance: &Provenance, cfg: &PipelineConfig) -> Result<RespirationEstimate> {
    Ok(process_window(window, &provenance.genome, cfg)?.estimate)
}

/// Which part of a single ratio stream a baseline estimator reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Amplitude,
    Phase,
}

/// Baseline: rate from the amplitude or unwrapped phase of one plain
/// ratio stream, through the same filters and estimator.
pub fn component_estimate(
    window: &CsiTrace,
    pair: (usize, usize),
    component: Component,
    cfg: &PipelineConfig,
) -> Result<RespirationEstimate> {
    let stream = cscr::cscr(window, pair.0, pair.1)?;
    let series = match component {
        Component::Amplitude => stream.amplitude(),
        Component::Phase => stream.phase(),
    };
    let filtered = waveform::clean(&series, window.sample_rate_hz, &cfg.filter)?;
    rate::estimate_rate(&filtered.values, window.sample_rate_hz, &cfg.rate)
}

/// Error raised when a caller needs at least one window.
pub fn require_windows(out: &PipelineOutput) -> Result<()> {
    if out.no_window() {
        let accepted = out.plan.accepted.iter().filter(|a| **a).count();
        return Err(Error::NoWindow { accepted, needed: out.plan.window_frames });
    }
    Ok(())
}
