//! Spectral sensing-signal-to-noise ratio.
//!
//! The SSNR of a series is the spectral energy inside the respiration band
//! `[0.167, 0.5]` Hz divided by the energy above 0.5 Hz. The series is
//! mean-removed, Hann-windowed and zero-padded to the next power of two at
//! least four times its length; each FFT bin is assigned by the absolute
//! value of its centre frequency, and the DC bin belongs to neither band.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};

pub const BAND_LOW_HZ: f64 = 0.167;
pub const BAND_HIGH_HZ: f64 = 0.5;

/// Out-of-band energy at or below this fraction of the total is treated as
/// zero and the ratio reported as infinite.
pub const INFINITE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsnrEstimate {
    #[serde(with = "crate::float_repr")]
    pub value: f64,
    pub band_energy: f64,
    pub out_of_band_energy: f64,
    pub fft_length: usize,
    pub infinite: bool,
}

impl SsnrEstimate {
    /// A zero series has ratio 0; a negligible out-of-band share is infinite.
    pub fn from_energies(band: f64, out: f64, fft_length: usize) -> Self {
        let total = band + out;
        let infinite = total > 0.0 && out <= INFINITE_FLOOR * total;
        let value = if infinite {
            f64::INFINITY
        } else if total == 0.0 {
            0.0
        } else {
            band / out
        };
        Self {
            value,
            band_energy: band,
            out_of_band_energy: out,
            fft_length,
            infinite,
        }
    }

    pub fn db(&self) -> f64 {
        10.0 * self.value.log10()
    }

    /// Ordering key that stays total when the ratio is infinite: infinite
    /// estimates are ranked among themselves by band energy.
    pub fn rank_key(&self) -> (f64, f64) {
        if self.infinite {
            (f64::INFINITY, self.band_energy)
        } else {
            (self.value, 0.0)
        }
    }
}

/// Reusable estimator for a fixed series length and sample rate.
pub struct SsnrEstimator {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    /// Per-bin class: 1 = band, 2 = out of band, 0 = ignored.
    class: Vec<u8>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SsnrEstimator {
    pub fn new(len: usize, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 1.0) {
            return Err(Error::Config(format!(
                "SSNR needs a sample rate above 1 Hz, got {sample_rate}"
            )));
        }
        let needed = (2.0 * sample_rate).ceil() as usize;
        if len < needed.max(2) {
            return Err(Error::TooShort { needed: needed.max(2), got: len });
        }
        let nfft = dsp::next_pow2(4 * len);
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        let window = (0..len)
            .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
            .collect();
        let class = (0..nfft)
            .map(|k| {
                let signed = if k <= nfft / 2 { k as f64 } else { k as f64 - nfft as f64 };
                let f = (signed * sample_rate / nfft as f64).abs();
                if k == 0 {
                    0
                } else if (BAND_LOW_HZ..=BAND_HIGH_HZ).contains(&f) {
                    1
                } else if f > BAND_HIGH_HZ {
                    2
                } else {
                    0
                }
            })
            .collect();
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Ok(Self {
            len,
            fft,
            window,
            class,
            buf: vec![Complex64::new(0.0, 0.0); nfft],
            scratch,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn fft_length(&self) -> usize {
        self.buf.len()
    }

    pub fn complex(&mut self, x: &[Complex64]) -> SsnrEstimate {
        assert_eq!(x.len(), self.len, "series length does not match estimator");
        let mu = dsp::mean_complex(x);
        for (dst, (v, w)) in self.buf.iter_mut().zip(x.iter().zip(&self.window)) {
            *dst = (v - mu) * w;
        }
        self.finish()
    }

    pub fn real(&mut self, x: &[f64]) -> SsnrEstimate {
        assert_eq!(x.len(), self.len, "series length does not match estimator");
        let mu = dsp::mean(x);
        for (dst, (v, w)) in self.buf.iter_mut().zip(x.iter().zip(&self.window)) {
            *dst = Complex64::new((v - mu) * w, 0.0);
        }
        self.finish()
    }

    fn finish(&mut self) -> SsnrEstimate {
        for v in &mut self.buf[self.len..] {
            *v = Complex64::new(0.0, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let (mut band, mut out) = (0.0, 0.0);
        for (v, c) in self.buf.iter().zip(&self.class) {
            match c {
                1 => band += v.norm_sqr(),
                2 => out += v.norm_sqr(),
                _ => {}
            }
        }
        SsnrEstimate::from_energies(band, out, self.buf.len())
    }
}

pub fn ssnr_complex(x: &[Complex64], sample_rate: f64) -> Result<SsnrEstimate> {
    Ok(SsnrEstimator::new(x.len(), sample_rate)?.complex(x))
}

pub fn ssnr_real(x: &[f64], sample_rate: f64) -> Result<SsnrEstimate> {
    Ok(SsnrEstimator::new(x.len(), sample_rate)?.real(x))
}
