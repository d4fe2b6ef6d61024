//! Single-antenna Wi-Fi respiration sensing from cross-subcarrier CSI ratios.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combiner;
pub mod config;
pub mod cscr;
pub mod dsp;
pub mod error;
pub mod eval;
mod float_repr;
pub mod gass;
pub mod grid;
pub mod mobius;
pub mod pipeline;
pub mod rate;
pub mod sim;
pub mod ssnr;
pub mod trace;
pub mod waveform;

pub use error::{Error, Result};
