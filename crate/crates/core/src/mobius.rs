//! Static/dynamic decomposition of a CSCR.
//!
//! With `Z(k)` on the unit circle the low-noise ratio is the fractional
//! linear map `(A·Z + B)/(C·Z + D)`, which splits exactly into the constant
//! `A/C` plus `(BC - AD)/C² · 1/(Z + D/C)`, a circle traced by the
//! respiration. Under high noise the averaged ratio is linear,
//! `B/D + (A/D)·Z`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SubcarrierGrid;
use crate::sim::ChannelScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseRegime {
    LowNoise,
    HighNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusParams {
    /// Coefficients and the unit-circle trajectory `Z(k)` of the pair
    /// `(m1, m2)` for a single-static-path scenario; `delta_theta` is the
    /// residual pair phase offset `(n(m1) - n(m2))·η_o`.
    pub fn from_scenario(
        scenario: &ChannelScenario,
        grid: &SubcarrierGrid,
        m1: usize,
        m2: usize,
        delta_theta: f64,
    ) -> (Self, Vec<Complex64>) {
        let hs = scenario.static_component(grid);
        let ad = scenario.dynamic_amplitudes(grid);
        let (l1, l2) = (grid.wavelength(m1), grid.wavelength(m2));
        let d0 = scenario.base_dynamic_length_m;
        let rot = Complex64::from_polar(1.0, -delta_theta);
        let params = Self {
            a: ad[m1] * rot,
            b: hs[m1] * rot,
            c: Complex64::from_polar(ad[m2], 2.0 * PI * d0 / l1 * (l2 - l1) / l2),
            d: hs[m2],
        };
        let z = scenario
            .displacement()
            .iter()
            .map(|dd| {
                Complex64::from_polar(1.0, -2.0 * PI * (d0 + scenario.geometric_factor * dd) / l1)
            })
            .collect();
        (params, z)
    }

    /// `(A·Z + B)/(C·Z + D)`.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobiusDecomposition {
    pub params: MobiusParams,
    pub regime: NoiseRegime,
    pub static_component: Complex64,
    pub dynamic_component: Vec<Complex64>,
    /// `angle(ℋ_S) - angle(ℋ_D(k))`, wrapped to `(-π, π]`.
    pub ratio_fresnel_phase: Vec<f64>,
}

impl MobiusDecomposition {
    /// `ℋ_S + ℋ_D(k)` for every sample.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        self.dynamic_component
            .iter()
            .map(|hd| self.static_component + hd)
            .collect()
    }
}

const UNIT_CIRCLE_TOL: f64 = 1e-9;

pub fn mobius_decompose(
    params: MobiusParams,
    z: &[Complex64],
    regime: NoiseRegime,
) -> Result<MobiusDecomposition> {
    let MobiusParams { a, b, c, d } = params;
    if d.norm() == 0.0 {
        return Err(Error::Degenerate("D must be nonzero".into()));
    }
    if regime == NoiseRegime::LowNoise && c.norm() == 0.0 {
        return Err(Error::Degenerate("C must be nonzero in the low-noise regime".into()));
    }
    if let Some(k) = z.iter().position(|v| (v.norm() - 1.0).abs() > UNIT_CIRCLE_TOL) {
        return Err(Error::Config(format!("Z({k}) is not on the unit circle")));
    }
    let (static_component, dynamic_component) = match regime {
        NoiseRegime::LowNoise => {
            let shift = d / c;
            let scale = (b * c - a * d) / (c * c);
            let pole_tol = 1e-12 * (1.0 + shift.norm());
            let mut dynamic = Vec::with_capacity(z.len());
            for (k, zk) in z.iter().enumerate() {
                let den = zk + shift;
                if den.norm() <= pole_tol {
                    return Err(Error::Singularity { k });
                }
                dynamic.push(scale / den);
            }
            (a / c, dynamic)
        }
        NoiseRegime::HighNoise => (b / d, z.iter().map(|zk| a / d * zk).collect()),
    };
    let ratio_fresnel_phase = dynamic_component
        .iter()
        .map(|hd| (static_component * hd.conj()).arg())
        .collect();
    Ok(MobiusDecomposition {
        params,
        regime,
        static_component,
        dynamic_component,
        ratio_fresnel_phase,
    })
}

/// Closed-form low-noise dynamic amplitude `|ℋ_D(m1, m2)|` for a pair with
/// time-invariant path gains.
#[allow(clippy::too_many_arguments)]
pub fn dynamic_amplitude_low_noise(
    static_m1: f64,
    dynamic_m1: f64,
    static_m2: f64,
    dynamic_m2: f64,
    d0_minus_ds: f64,
    lambda_m1: f64,
    lambda_m2: f64,
) -> Result<f64> {
    let den = static_m2 * static_m2 - dynamic_m2 * dynamic_m2;
    if den == 0.0 {
        return Err(Error::Degenerate(
            "|A_S(m2)|² equals |A_D(m2)|²: dynamic amplitude undefined".into(),
        ));
    }
    let phase = -2.0 * PI * d0_minus_ds * (lambda_m1 - lambda_m2) / (lambda_m1 * lambda_m2);
    let num = Complex64::from_polar(static_m1 * dynamic_m2, phase) - dynamic_m1 * static_m2;
    Ok(num.norm() / den.abs())
}
