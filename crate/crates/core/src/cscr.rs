//! Cross-subcarrier CSI ratios.
//!
//! Dividing the CSI of two subcarriers of the same receive chain cancels
//! every impairment that is common to both: the CFO phase, the amplitude
//! impulse level and (after block averaging of the PBD jitter) all of the
//! phase slope except a constant `(n(m1) - n(m2))·η_o`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};
use crate::sim::{CsiFrame, CsiTrace};

/// Denominator samples below this fraction of the median denominator
/// magnitude are treated as invalid.
pub const DENOMINATOR_GUARD: f64 = 1e-9;

/// Largest fraction of invalid denominator samples that is repaired by
/// interpolation; above it the stream is rejected.
pub const MAX_FLAGGED_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Numerator {
    Single(usize),
    Weighted(Vec<(Complex64, usize)>),
}

impl Numerator {
    pub fn indices(&self) -> Vec<usize> {
        match self {
            Numerator::Single(m) => vec![*m],
            Numerator::Weighted(terms) => terms.iter().map(|t| t.1).collect(),
        }
    }
}

/// A time series of complex ratios and the pairing that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CscrStream {
    pub numerator: Numerator,
    pub denominator: usize,
    pub values: Vec<Complex64>,
    pub sample_rate_hz: f64,
    /// Samples rebuilt by interpolation after tripping the guard.
    pub interpolated: usize,
}

impl CscrStream {
    pub fn amplitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Unwrapped phase.
    pub fn phase(&self) -> Vec<f64> {
        dsp::unwrap(&self.values.iter().map(|v| v.arg()).collect::<Vec<_>>())
    }
}

/// Block-averages the measured phase (unwrapped over time per subcarrier)
/// and the magnitude over `k1` consecutive frames. Returns `⌊K/k1⌋` frames
/// at rate `F_s/k1`; a trailing partial block is dropped.
pub fn average_phase_blocks(trace: &CsiTrace, k1: usize) -> Result<CsiTrace> {
    if trace.is_empty() {
        return Err(Error::TooShort { needed: k1.max(1), got: 0 });
    }
    if k1 == 0 {
        return Err(Error::Config("block size K1 must be at least 1".into()));
    }
    if trace.len() < k1 {
        return Err(Error::TooShort { needed: k1, got: trace.len() });
    }
    if k1 == 1 {
        return Ok(trace.clone());
    }
    let blocks = trace.len() / k1;
    let m_count = trace.grid.len();
    let mut values = vec![vec![Complex64::new(0.0, 0.0); m_count]; blocks];
    let mut phase = Vec::with_capacity(trace.len());
    for m in 0..m_count {
        phase.clear();
        phase.extend(trace.frames.iter().map(|f| f.values[m].arg()));
        let unwrapped = dsp::unwrap(&phase);
        for (b, row) in values.iter_mut().enumerate() {
            let span = b * k1..(b + 1) * k1;
            let mean_phase = dsp::mean(&unwrapped[span.clone()]);
            let mean_mag = trace.frames[span].iter().map(|f| f.values[m].norm()).sum::<f64>()
                / k1 as f64;
            row[m] = Complex64::from_polar(mean_mag, mean_phase);
        }
    }
    let frames = values
        .into_iter()
        .enumerate()
        .map(|(b, values)| CsiFrame {
            k: b,
            timestamp_s: trace.frames[b * k1].timestamp_s,
            values,
        })
        .collect();
    CsiTrace::new(trace.grid.clone(), trace.sample_rate_hz / k1 as f64, frames)
}

/// `num / den` sample by sample with the denominator guard applied.
/// Returns the ratio and the number of repaired samples.
pub fn guarded_ratio(num: &[Complex64], den: &[Complex64]) -> Result<(Vec<Complex64>, usize)> {
    debug_assert_eq!(num.len(), den.len());
    let mags: Vec<f64> = den.iter().map(|d| d.norm()).collect();
    let floor = DENOMINATOR_GUARD * dsp::median(&mags);
    let valid: Vec<bool> = mags.iter().map(|m| *m > floor && m.is_finite()).collect();
    let flagged = valid.iter().filter(|v| !**v).count();
    if flagged == 0 {
        return Ok((num.iter().zip(den).map(|(n, d)| n / d).collect(), 0));
    }
    if flagged as f64 > MAX_FLAGGED_FRACTION * den.len() as f64 || flagged == den.len() {
        return Err(Error::DenominatorGuard { flagged, total: den.len() });
    }
    let mut out: Vec<Complex64> = num
        .iter()
        .zip(den)
        .zip(&valid)
        .map(|((n, d), ok)| if *ok { n / d } else { Complex64::new(0.0, 0.0) })
        .collect();
    interpolate_gaps(&mut out, &valid);
    Ok((out, flagged))
}

/// Linear interpolation across invalid samples; edge gaps copy the nearest
/// valid value.
fn interpolate_gaps(x: &mut [Complex64], valid: &[bool]) {
    let n = x.len();
    let mut k = 0;
    while k < n {
        if valid[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && !valid[k] {
            k += 1;
        }
        let left = start.checked_sub(1).map(|i| x[i]);
        let right = (k < n).then(|| x[k]);
        for (off, slot) in x[start..k].iter_mut().enumerate() {
            *slot = match (left, right) {
                (Some(l), Some(r)) => {
                    let t = (off + 1) as f64 / (k - start + 1) as f64;
                    l + (r - l) * t
                }
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => Complex64::new(0.0, 0.0),
            };
        }
    }
}

fn check_index(trace: &CsiTrace, m: usize) -> Result<()> {
    if m >= trace.grid.len() {
        return Err(Error::Config(format!(
            "subcarrier {m} outside a grid of {}",
            trace.grid.len()
        )));
    }
    Ok(())
}

/// `H̃(m1,k) / H̃(m2,k)` for every frame.
pub fn cscr(trace: &CsiTrace, m1: usize, m2: usize) -> Result<CscrStream> {
    check_index(trace, m1)?;
    check_index(trace, m2)?;
    if m1 == m2 {
        return Err(Error::Config(format!("CSCR needs distinct subcarriers, got {m1} twice")));
    }
    let (values, interpolated) = guarded_ratio(&trace.column(m1), &trace.column(m2))?;
    Ok(CscrStream {
        numerator: Numerator::Single(m1),
        denominator: m2,
        values,
        sample_rate_hz: trace.sample_rate_hz,
        interpolated,
    })
}

/// `Σ a_i·H̃(m_i,k) / H̃(m_d,k)`.
pub fn weighted_cscr(
    trace: &CsiTrace,
    terms: &[(Complex64, usize)],
    denominator: usize,
) -> Result<CscrStream> {
    check_index(trace, denominator)?;
    for (_, m) in terms {
        check_index(trace, *m)?;
    }
    let num: Vec<Complex64> = trace
        .frames
        .iter()
        .map(|f| terms.iter().map(|(a, m)| a * f.values[*m]).sum())
        .collect();
    let (values, interpolated) = guarded_ratio(&num, &trace.column(denominator))?;
    Ok(CscrStream {
        numerator: Numerator::Weighted(terms.to_vec()),
        denominator,
        values,
        sample_rate_hz: trace.sample_rate_hz,
        interpolated,
    })
}
