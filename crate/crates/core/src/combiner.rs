//! Alignment and SSNR-weighted combination of ratio streams.
//!
//! Each stream is offset-removed (`Q`), normalised by its largest
//! sliding-window mean magnitude (`G`), rotated onto the reference stream
//! and summed with weight `γ = β·u(β - μβ₀)`, where `β` is the stream SSNR
//! and `β₀` the largest one. The sum is then smoothed with a 0.33 s moving
//! average.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cscr::CscrStream;
use crate::dsp;
use crate::error::{Error, Result};
use crate::ssnr::{SsnrEstimate, SsnrEstimator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `V = Q / G`.
    #[default]
    DivideByGain,
    /// `V = G·Q`, kept for comparison.
    MultiplyByGain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombinerParams {
    /// Threshold factor `μ` in `[0, 1]`.
    pub mu: f64,
    /// Gain window `K3` in seconds.
    pub gain_window_s: f64,
    /// Moving-average length in seconds; `I = ⌊s·F_s⌋` samples.
    pub smoothing_s: f64,
    pub normalization: Normalization,
    /// Block-decimate by `I` instead of the sliding average.
    pub decimate: bool,
}

impl Default for CombinerParams {
    fn default() -> Self {
        Self {
            mu: 0.5,
            gain_window_s: 0.5,
            smoothing_s: 0.33,
            normalization: Normalization::DivideByGain,
            decimate: false,
        }
    }
}

impl CombinerParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::Config(format!("combiner.mu must be in [0, 1], got {}", self.mu)));
        }
        for (name, v) in [("gain_window_s", self.gain_window_s), ("smoothing_s", self.smoothing_s)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("combiner.{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedStream {
    pub denominator: usize,
    pub offset_removed: Vec<Complex64>,
    pub gain: f64,
    pub normalized: Vec<Complex64>,
    pub rotation: f64,
    pub beta: SsnrEstimate,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedSignal {
    /// `ℋ_Fd(k)`.
    pub combined: Vec<Complex64>,
    /// `ℋ_FTd(k)`.
    pub smoothed: Vec<Complex64>,
    pub window_samples: usize,
    pub contributing_streams: usize,
    /// Denominator subcarrier of the reference stream.
    pub reference: usize,
    /// Rate of `smoothed`.
    pub sample_rate_hz: f64,
}

/// `Q(k) = ℋ(k) - mean(ℋ)`.
pub fn remove_offset(values: &[Complex64]) -> Vec<Complex64> {
    let mu = dsp::mean_complex(values);
    values.iter().map(|v| v - mu).collect()
}

/// Largest magnitude of the mean of `q` over any `k3` consecutive samples.
pub fn stream_gain(q: &[Complex64], k3: usize) -> f64 {
    if q.is_empty() {
        return 0.0;
    }
    let k3 = k3.clamp(1, q.len());
    let mut acc: Complex64 = q[..k3].iter().sum();
    let mut best = acc.norm();
    for k in k3..q.len() {
        acc += q[k] - q[k - k3];
        best = best.max(acc.norm());
    }
    best / k3 as f64
}

/// Rotation `Θ` minimising `Σ|v_ref - v·e^{jΘ}|²`, or `None` when
/// `Σ v_ref·conj(v)` vanishes.
pub fn align_rotation(v_ref: &[Complex64], v: &[Complex64]) -> Option<f64> {
    let s: Complex64 = v_ref.iter().zip(v).map(|(r, x)| r * x.conj()).sum();
    (s.norm() > 0.0 && s.norm().is_finite()).then(|| s.arg())
}

/// Rank order on SSNR that stays total with infinite values.
fn better(a: &SsnrEstimate, b: &SsnrEstimate) -> bool {
    let (ka, kb) = (a.rank_key(), b.rank_key());
    ka.0 > kb.0 || (ka.0 == kb.0 && ka.1 > kb.1)
}

/// `γ = β` when `β ≥ μ·β₀`, else 0. If the best stream is infinite, the
/// infinite streams survive with unit weight.
fn final_weight(beta: &SsnrEstimate, beta0: &SsnrEstimate, mu: f64) -> f64 {
    if beta0.infinite {
        return if beta.infinite { 1.0 } else { 0.0 };
    }
    if beta.value >= mu * beta0.value {
        beta.value
    } else {
        0.0
    }
}

/// Aligns and combines `streams`; they must share length and rate.
pub fn combine(streams: &[CscrStream], params: &CombinerParams) -> Result<(CombinedSignal, Vec<AlignedStream>)> {
    params.validate()?;
    let first = streams.first().ok_or(Error::NoStreams)?;
    let (len, fs) = (first.values.len(), first.sample_rate_hz);
    if streams.iter().any(|s| s.values.len() != len || s.sample_rate_hz != fs) {
        return Err(Error::Config("streams differ in length or rate".into()));
    }
    let mut estimator = SsnrEstimator::new(len, fs)?;
    let k3 = ((params.gain_window_s * fs).floor() as usize).max(1);

    let mut aligned = Vec::with_capacity(streams.len());
    for s in streams {
        let q = remove_offset(&s.values);
        let gain = stream_gain(&q, k3);
        if !(gain > 0.0 && gain.is_finite()) {
            log::info!("stream over subcarrier {} dropped: zero gain", s.denominator);
            continue;
        }
        let normalized = match params.normalization {
            Normalization::DivideByGain => q.iter().map(|v| v / gain).collect(),
            Normalization::MultiplyByGain => q.iter().map(|v| v * gain).collect(),
        };
        aligned.push(AlignedStream {
            denominator: s.denominator,
            beta: estimator.complex(&s.values),
            offset_removed: q,
            gain,
            normalized,
            rotation: 0.0,
            gamma: 0.0,
        });
    }
    if aligned.is_empty() {
        return Err(Error::NoStreams);
    }

    let mut reference = 0;
    for i in 1..aligned.len() {
        if better(&aligned[i].beta, &aligned[reference].beta) {
            reference = i;
        }
    }
    let beta0 = aligned[reference].beta;
    let v_ref = aligned[reference].normalized.clone();

    let mut combined = vec![Complex64::new(0.0, 0.0); len];
    let mut contributing = 0;
    for s in aligned.iter_mut() {
        s.gamma = final_weight(&s.beta, &beta0, params.mu);
        if s.gamma == 0.0 {
            continue;
        }
        match align_rotation(&v_ref, &s.normalized) {
            Some(theta) => s.rotation = theta,
            None => {
                log::info!("stream over subcarrier {} dropped: alignment undefined", s.denominator);
                s.gamma = 0.0;
                continue;
            }
        }
        let w = Complex64::from_polar(s.gamma, s.rotation);
        for (acc, v) in combined.iter_mut().zip(&s.normalized) {
            *acc += w * v;
        }
        contributing += 1;
    }

    let window_samples = ((params.smoothing_s * fs).floor() as usize).max(1);
    let (smoothed, out_rate) = if params.decimate {
        (dsp::block_average(&combined, window_samples), fs / window_samples as f64)
    } else {
        (dsp::moving_average_centered(&combined, window_samples), fs)
    };
    Ok((
        CombinedSignal {
            combined,
            smoothed,
            window_samples,
            contributing_streams: contributing,
            reference: aligned[reference].denominator,
            sample_rate_hz: out_rate,
        },
        aligned,
    ))
}
