//! Respiratory rate from autocorrelation peak spacing.
//!
//! The lag-0 maximum is the first peak; the rate is `60·F_s/lag` where
//! `lag` is the distance to the next qualifying ACF peak.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};

/// Reported rates lie in the 0.167–0.5 Hz band.
pub const MIN_BPM: f64 = 60.0 * 0.167;
pub const MAX_BPM: f64 = 30.0;

/// Biased autocorrelation normalised to `acf[0] = 1`, lags `0..len`.
pub fn acf(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: x.len() });
    }
    let mu = dsp::mean(x);
    let n = x.len();
    let nfft = dsp::next_pow2(2 * n);
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(v - mu, 0.0)).collect();
    buf.resize(nfft, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(nfft).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(nfft).process(&mut buf);
    let r0 = buf[0].re;
    let power: f64 = x.iter().map(|v| (v - mu).powi(2)).sum();
    if !(power > 0.0) || !(r0 > 0.0) {
        return Err(Error::UndefinedAcf);
    }
    Ok(buf[..n].iter().map(|v| v.re / r0).collect())
}

/// Topographic prominence of the local maximum at `i`.
fn prominence(x: &[f64], i: usize) -> f64 {
    let h = x[i];
    let mut left_min = h;
    for j in (0..i).rev() {
        if x[j] > h {
            break;
        }
        left_min = left_min.min(x[j]);
    }
    let mut right_min = h;
    for &v in &x[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Peaks of `acf` with lag 0 treated as a peak. Candidates are strict
/// local maxima (the first sample of a plateau); the minimum spacing is
/// enforced first, tallest peaks winning, and the prominence filter last,
/// so raising the threshold can only remove peaks. Returns ascending lags
/// with prominences.
pub fn find_peaks(acf: &[f64], min_distance: usize, min_prominence: f64) -> Vec<(usize, f64)> {
    if acf.is_empty() {
        return Vec::new();
    }
    let mut candidates = vec![0];
    for i in 1..acf.len().saturating_sub(1) {
        if acf[i] > acf[i - 1] {
            let mut j = i;
            while j + 1 < acf.len() && acf[j + 1] == acf[i] {
                j += 1;
            }
            if j + 1 < acf.len() && acf[j + 1] < acf[i] {
                candidates.push(i);
            }
        }
    }
    let mut by_height = candidates.clone();
    by_height.sort_by(|a, b| acf[*b].total_cmp(&acf[*a]).then(a.cmp(b)));
    let mut kept: Vec<usize> = Vec::new();
    for c in by_height {
        if kept.iter().all(|k| k.abs_diff(c) >= min_distance) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept.into_iter()
        .map(|i| (i, if i == 0 { f64::INFINITY } else { prominence(acf, i) }))
        .filter(|(_, p)| *p >= min_prominence)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateFlag {
    Ok,
    /// No ACF peak after lag 0 passed detection.
    NoPeak,
    /// A peak was found but the rate lies outside the respiration band.
    OutOfBand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateParams {
    /// Prominence threshold as a fraction of the largest ACF value after
    /// lag 0.
    pub prominence_fraction: f64,
    /// Minimum peak spacing in seconds.
    pub min_peak_distance_s: f64,
    /// Shortest accepted series in seconds.
    pub min_window_s: f64,
    /// Parabolic sub-sample refinement of the second peak.
    pub refine: bool,
}

impl Default for RateParams {
    fn default() -> Self {
        Self { prominence_fraction: 0.2, min_peak_distance_s: 2.0, min_window_s: 10.0, refine: true }
    }
}

impl RateParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.prominence_fraction) && ok(self.min_peak_distance_s) && ok(self.min_window_s) {
            Ok(())
        } else {
            Err(Error::Config(format!("rate parameters must be finite and non-negative: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RespirationEstimate {
    /// Withheld unless the flag is `Ok`.
    pub f_bpm: Option<f64>,
    /// Rate implied by the detected peak, even when out of band.
    pub raw_bpm: Option<f64>,
    /// One-based ACF indices of the two peaks.
    pub peak_index_1: usize,
    pub peak_index_2: Option<usize>,
    /// Peak spacing in samples after refinement.
    pub lag_samples: Option<f64>,
    /// Prominence of the second peak over the ACF range, in `[0, 1]`.
    pub confidence: f64,
    pub flag: RateFlag,
    #[serde(skip)]
    pub acf: Vec<f64>,
}

/// Vertex of the parabola through `(-1, a)`, `(0, b)`, `(1, c)`.
fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / den).clamp(-0.5, 0.5)
}

pub fn estimate_rate(x: &[f64], sample_rate: f64, params: &RateParams) -> Result<RespirationEstimate> {
    let needed = (params.min_window_s * sample_rate).round() as usize;
    if x.len() < needed.max(2) {
        return Err(Error::TooShort { needed: needed.max(2), got: x.len() });
    }
    let r = acf(x)?;
    let after_zero = r[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = params.prominence_fraction * after_zero.max(0.0);
    let distance = ((params.min_peak_distance_s * sample_rate).floor() as usize).max(1);
    let peaks = find_peaks(&r, distance, threshold);
    let range = 1.0 - r.iter().copied().fold(f64::INFINITY, f64::min);

    let Some(&(k2, prom)) = peaks.iter().find(|(lag, _)| *lag > 0) else {
        return Ok(RespirationEstimate {
            f_bpm: None,
            raw_bpm: None,
            peak_index_1: 1,
            peak_index_2: None,
            lag_samples: None,
            confidence: 0.0,
            flag: RateFlag::NoPeak,
            acf: r,
        });
    };
    let mut lag = k2 as f64;
    if params.refine && k2 + 1 < r.len() {
        // Undo the biased estimator's (1 - τ/N) taper so the vertex is not
        // pulled towards shorter lags.
        let n = x.len() as f64;
        let unbiased = |t: usize| r[t] / (1.0 - t as f64 / n);
        let mut k = k2;
        for _ in 0..2 {
            if k + 2 < r.len() && unbiased(k + 1) > unbiased(k) {
                k += 1;
            } else if k > 1 && unbiased(k - 1) > unbiased(k) {
                k -= 1;
            } else {
                break;
            }
        }
        if k + 1 < r.len() {
            lag = k as f64 + parabolic_offset(unbiased(k - 1), unbiased(k), unbiased(k + 1));
        }
    }
    let bpm = 60.0 * sample_rate / lag;
    let in_band = (MIN_BPM..=MAX_BPM).contains(&bpm);
    Ok(RespirationEstimate {
        f_bpm: in_band.then_some(bpm),
        raw_bpm: Some(bpm),
        peak_index_1: 1,
        peak_index_2: Some(k2 + 1),
        lag_samples: Some(lag),
        confidence: if range > 0.0 { (prom / range).clamp(0.0, 1.0) } else { 0.0 },
        flag: if in_band { RateFlag::Ok } else { RateFlag::OutOfBand },
        acf: r,
    })
}

/// `60·F_s/|k_p2 - k_p1|`.
pub fn rate_from_peaks(k_p1: usize, k_p2: usize, sample_rate: f64) -> Option<f64> {
    let d = k_p1.abs_diff(k_p2);
    (d > 0).then(|| 60.0 * sample_rate / d as f64)
}
