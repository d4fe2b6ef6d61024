//! Real waveform recovery: projection of the combined complex signal onto
//! its best axis, then Hampel and Savitzky–Golay cleaning.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ssnr::{SsnrEstimate, SsnrEstimator};

pub const PROJECTION_GRID: usize = 360;

/// SSNRs closer than this (relative) count as ties in the angle search.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedWaveform {
    pub values: Vec<f64>,
    /// In `[0, 2π)`.
    pub theta: f64,
    pub ssnr: SsnrEstimate,
}

pub fn project_at(x: &[Complex64], theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    x.iter().map(|v| c * v.re + s * v.im).collect()
}

fn beats(a: &SsnrEstimate, b: &SsnrEstimate) -> bool {
    let (ka, kb) = (a.rank_key(), b.rank_key());
    if ka.0.is_finite() && kb.0.is_finite() {
        ka.0 > kb.0 * (1.0 + TIE_TOL)
    } else if ka.0 == kb.0 {
        ka.1 > kb.1 * (1.0 + TIE_TOL)
    } else {
        ka.0 > kb.0
    }
}

/// Best projection angle over a 360-point grid, refined by one
/// golden-section pass over the neighbouring grid cells. Ties go to the
/// smaller angle.
pub fn project(x: &[Complex64], sample_rate: f64) -> Result<ProjectedWaveform> {
    let mut est = SsnrEstimator::new(x.len(), sample_rate)?;
    let mut eval = |theta: f64| est.real(&project_at(x, theta));

    let step = 2.0 * PI / PROJECTION_GRID as f64;
    let mut best = (0.0, eval(0.0));
    for i in 1..PROJECTION_GRID {
        let theta = i as f64 * step;
        let s = eval(theta);
        if beats(&s, &best.1) {
            best = (theta, s);
        }
    }

    if !best.1.infinite {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (best.0 - step, best.0 + step);
        let mut c = hi - inv_phi * (hi - lo);
        let mut d = lo + inv_phi * (hi - lo);
        let (mut fc, mut fd) = (eval(c), eval(d));
        for _ in 0..40 {
            if fc.rank_key().0 >= fd.rank_key().0 {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = eval(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = eval(d);
            }
        }
        let theta = 0.5 * (lo + hi);
        let s = eval(theta);
        if beats(&s, &best.1) {
            best = (theta.rem_euclid(2.0 * PI), s);
        }
    }
    Ok(ProjectedWaveform { values: project_at(x, best.0), theta: best.0, ssnr: best.1 })
}

fn median_of(buf: &mut [f64]) -> f64 {
    buf.sort_by(f64::total_cmp);
    let n = buf.len();
    if n % 2 == 1 {
        buf[n / 2]
    } else {
        0.5 * (buf[n / 2 - 1] + buf[n / 2])
    }
}

/// Hampel filter with half-width `w` and threshold `t`: a sample further
/// than `t·1.4826·MAD` from its window median is replaced by that median.
/// Windows are truncated at the edges; with `MAD = 0` any deviation counts.
/// Returns the filtered series and the replacement count.
pub fn hampel(x: &[f64], w: usize, t: f64) -> Result<(Vec<f64>, usize)> {
    if w == 0 || !(t > 0.0) {
        return Err(Error::Config(format!("Hampel needs w >= 1 and t > 0, got w={w}, t={t}")));
    }
    let mut out = x.to_vec();
    let mut replaced = 0;
    let mut buf = Vec::with_capacity(2 * w + 1);
    for k in 0..x.len() {
        let (lo, hi) = (k.saturating_sub(w), (k + w + 1).min(x.len()));
        buf.clear();
        buf.extend_from_slice(&x[lo..hi]);
        let med = median_of(&mut buf);
        for v in buf.iter_mut() {
            *v = (*v - med).abs();
        }
        let mad = median_of(&mut buf);
        if (x[k] - med).abs() > t * 1.4826 * mad {
            out[k] = med;
            replaced += 1;
        }
    }
    Ok((out, replaced))
}

/// Least-squares weights that evaluate, at offset 0, the degree-`order`
/// polynomial fitted to samples at `offsets`.
fn sg_weights(offsets: &[f64], order: usize) -> Vec<f64> {
    let order = order.min(offsets.len() - 1);
    let scale = offsets.iter().fold(1.0f64, |m, o| m.max(o.abs()));
    let a = DMatrix::from_fn(offsets.len(), order + 1, |r, c| (offsets[r] / scale).powi(c as i32));
    let pinv = a.pseudo_inverse(1e-12).expect("pseudo-inverse");
    pinv.row(0).iter().copied().collect()
}

/// Savitzky–Golay smoothing with odd window `len` and polynomial order
/// `order`. Edge samples use a fit on the truncated centred window.
pub fn savitzky_golay(x: &[f64], len: usize, order: usize) -> Result<Vec<f64>> {
    if len.is_multiple_of(2) || order >= len {
        return Err(Error::Config(format!(
            "Savitzky-Golay needs an odd window longer than the order, got L={len}, p={order}"
        )));
    }
    let n = x.len();
    let half = len / 2;
    if n == 0 {
        return Ok(Vec::new());
    }
    let offsets: Vec<f64> = (0..len).map(|j| j as f64 - half as f64).collect();
    let kernel = sg_weights(&offsets, order);
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate() {
        let (lo, hi) = (k.saturating_sub(half), (k + half + 1).min(n));
        if hi - lo == len {
            *slot = kernel.iter().zip(&x[lo..hi]).map(|(c, v)| c * v).sum();
        } else {
            let offs: Vec<f64> = (lo..hi).map(|j| j as f64 - k as f64).collect();
            let w = sg_weights(&offs, order);
            *slot = w.iter().zip(&x[lo..hi]).map(|(c, v)| c * v).sum();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterParams {
    /// Hampel half-width in seconds; `w = ⌊s·F_s⌋`.
    pub hampel_half_width_s: f64,
    pub hampel_threshold: f64,
    /// SG window: the next odd sample count at or above `s·F_s`.
    pub sg_window_s: f64,
    pub sg_order: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self { hampel_half_width_s: 0.5, hampel_threshold: 3.0, sg_window_s: 1.0, sg_order: 3 }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.hampel_half_width_s) && ok(self.hampel_threshold) && ok(self.sg_window_s) {
            Ok(())
        } else {
            Err(Error::Config(format!("filter parameters must be finite and non-negative: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredWaveform {
    pub values: Vec<f64>,
    pub hampel_replacements: usize,
    pub sg_window: usize,
    pub sg_order: usize,
}

pub fn clean(x: &[f64], sample_rate: f64, params: &FilterParams) -> Result<FilteredWaveform> {
    let w = ((params.hampel_half_width_s * sample_rate).floor() as usize).max(1);
    let (h, replaced) = hampel(x, w, params.hampel_threshold)?;
    let mut len = (params.sg_window_s * sample_rate).ceil() as usize;
    if len.is_multiple_of(2) {
        len += 1;
    }
    let len = len.max(params.sg_order + 1 + params.sg_order.is_multiple_of(2) as usize);
    let values = savitzky_golay(&h, len, params.sg_order)?;
    Ok(FilteredWaveform {
        values,
        hampel_replacements: replaced,
        sg_window: len,
        sg_order: params.sg_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp;
    use crate::ssnr::ssnr_real;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sine(n: usize, fs: f64, f: f64) -> Vec<f64> {
        (0..n).map(|k| (2.0 * PI * f * k as f64 / fs).sin()).collect()
    }

    fn with_noise(x: &[f64], sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, sigma).unwrap();
        x.iter().map(|v| v + n.sample(&mut rng)).collect()
    }

    #[test]
    fn real_signal_projects_onto_real_axis() {
        let fs = 10.0;
        let s = with_noise(&sine(200, fs, 0.25), 0.05, 1);
        let x: Vec<Complex64> = s.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let p = project(&x, fs).unwrap();
        let axis = Complex64::from_polar(1.0, 2.0 * p.theta).arg().abs();
        assert!(axis < 1e-6, "{}", p.theta);
        let direct = ssnr_real(&s, fs).unwrap().value;
        assert!((p.ssnr.value - direct).abs() <= 1e-6 * direct);
    }

    #[test]
    fn rotated_signal_recovers_angle() {
        let fs = 10.0;
        let s = sine(200, fs, 0.3);
        let (nr, ni) = (with_noise(&vec![0.0; 200], 0.05, 2), with_noise(&vec![0.0; 200], 0.05, 3));
        let rot = Complex64::from_polar(1.0, PI / 4.0);
        // Strong noise on the orthogonal axis, weak isotropic noise elsewhere.
        let x: Vec<Complex64> = (0..200)
            .map(|k| rot * (s[k] + Complex64::new(0.0, 20.0 * nr[k])) + 0.01 * Complex64::new(nr[k], ni[k]))
            .collect();
        let p = project(&x, fs).unwrap();
        let step = 2.0 * PI / PROJECTION_GRID as f64;
        let d = Complex64::from_polar(1.0, 2.0 * (p.theta - PI / 4.0)).arg().abs() / 2.0;
        assert!(d <= step, "{}", p.theta);
        assert!(p.theta < PI);
    }

    #[test]
    fn projection_beats_dense_grid_and_both_axes() {
        let fs = 10.0;
        let n = 200;
        let motion = sine(n, fs, 0.25);
        let noise = with_noise(&vec![0.0; n], 0.5, 3);
        let x: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(noise[k] + 0.3 * motion[k], motion[k] + 0.2 * noise[k]))
            .collect();
        let p = project(&x, fs).unwrap();
        let re: Vec<f64> = x.iter().map(|v| v.re).collect();
        let im: Vec<f64> = x.iter().map(|v| v.im).collect();
        let axes = ssnr_real(&re, fs).unwrap().value.max(ssnr_real(&im, fs).unwrap().value);
        assert!(p.ssnr.value >= axes);
        let dense = (0..3600)
            .map(|i| ssnr_real(&project_at(&x, 2.0 * PI * i as f64 / 3600.0), fs).unwrap().value)
            .fold(0.0, f64::max);
        assert!(p.ssnr.value >= dense * (1.0 - 1e-9), "{} vs {dense}", p.ssnr.value);
        // Θ and Θ+π give negated series with the same SSNR.
        let a = project_at(&x, p.theta);
        let b = project_at(&x, p.theta + PI);
        for (u, v) in a.iter().zip(&b) {
            assert!((u + v).abs() < 1e-12);
        }
        let (sa, sb) = (ssnr_real(&a, fs).unwrap().value, ssnr_real(&b, fs).unwrap().value);
        assert!((sa - sb).abs() <= 1e-12 * sa);
    }

    #[test]
    fn hampel_cases() {
        let (y, r) = hampel(&[2.0; 30], 3, 3.0).unwrap();
        assert_eq!((y, r), (vec![2.0; 30], 0));
        let mut x = vec![1.0; 15];
        x[7] = 1.5;
        let (y, r) = hampel(&x, 3, 3.0).unwrap();
        assert_eq!((y, r), (vec![1.0; 15], 1));
        let mut s = sine(200, 10.0, 0.25);
        s[57] += 100.0;
        let (y, r) = hampel(&s, 5, 3.0).unwrap();
        assert_eq!(r, 1);
        assert!(y[57].abs() <= 1.0);
        assert!(hampel(&s, 0, 3.0).is_err());
    }

    #[test]
    fn sg_reproduces_polynomials() {
        let x: Vec<f64> = (0..60).map(|k| {
            let t = k as f64 * 0.1;
            1.0 - 2.0 * t + 0.5 * t * t - 0.05 * t * t * t
        }).collect();
        let y = savitzky_golay(&x, 11, 3).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sg_impulse_response_is_the_kernel() {
        let mut x = vec![0.0; 31];
        x[15] = 1.0;
        let y = savitzky_golay(&x, 7, 2).unwrap();
        // Classic 7-point quadratic smoothing coefficients.
        let expected = [-2.0, 3.0, 6.0, 7.0, 6.0, 3.0, -2.0].map(|c| c / 21.0);
        for (j, e) in expected.iter().enumerate() {
            assert!((y[12 + j] - e).abs() < 1e-12);
        }
        assert!((expected.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sg_reduces_white_noise_variance() {
        for seed in 0..10 {
            let x = with_noise(&vec![0.0; 500], 1.0, seed);
            let y = savitzky_golay(&x, 11, 3).unwrap();
            assert!(dsp::variance(&y) < dsp::variance(&x));
        }
        assert!(savitzky_golay(&[0.0; 10], 6, 2).is_err());
        assert!(savitzky_golay(&[0.0; 10], 5, 5).is_err());
    }

    #[test]
    fn chain_keeps_length_and_dominant_frequency() {
        let fs = 10.0;
        let x = sine(300, fs, 0.3);
        let f = clean(&x, fs, &FilterParams::default()).unwrap();
        assert_eq!(f.values.len(), x.len());
        assert_eq!(f.sg_window, 11);
        let peak = |s: &[f64]| {
            let mags: Vec<f64> = (1..150)
                .map(|b| {
                    s.iter()
                        .enumerate()
                        .map(|(k, v)| Complex64::from_polar(*v, -2.0 * PI * (b * k) as f64 / 300.0))
                        .sum::<Complex64>()
                        .norm()
                })
                .collect();
            dsp::argmax(&mags)
        };
        assert_eq!(peak(&x), peak(&f.values));
    }
}
