//! OFDM subcarrier grids for the 2.4 GHz channel-11, 40 MHz configuration.
//!
//! The default combined grid concatenates the 114 HT-LTF subcarriers
//! (array indices 0..114) with the 104 L-LTF subcarriers (114..218). L-LTF
//! is transmitted as two duplicated 20 MHz legacy symbols, so its physical
//! indices are the legacy set `±1..=±26` shifted by `±32`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Centre frequency of a 40 MHz channel anchored on channel 11 (HT40-).
pub const CHANNEL_11_40MHZ_CENTER_HZ: f64 = 2_452.0e6;

/// Subcarrier spacing for 802.11n.
pub const SUBCARRIER_SPACING_HZ: f64 = 312.5e3;

/// Preamble field a CSI estimate originates from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldTag {
    #[serde(rename = "L-LTF")]
    LLtf,
    #[serde(rename = "HT-LTF")]
    HtLtf,
}

impl FieldTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldTag::LLtf => "L-LTF",
            FieldTag::HtLtf => "HT-LTF",
        }
    }
}

/// One column of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subcarrier {
    pub field: FieldTag,
    /// Physical (signed) subcarrier index `n(m)`.
    pub index: i32,
    pub freq_hz: f64,
}

impl Subcarrier {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.freq_hz
    }
}

/// An ordered set of subcarriers; array position `m` is the column index
/// used everywhere else in the crate (zero-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierGrid {
    subcarriers: Vec<Subcarrier>,
}

impl SubcarrierGrid {
    pub fn new(subcarriers: Vec<Subcarrier>) -> Result<Self> {
        if subcarriers.is_empty() {
            return Err(Error::Config("subcarrier grid is empty".into()));
        }
        for (m, sc) in subcarriers.iter().enumerate() {
            if !(sc.freq_hz.is_finite() && sc.freq_hz > 0.0) {
                return Err(Error::Config(format!(
                    "subcarrier {m} has non-positive frequency {}",
                    sc.freq_hz
                )));
            }
        }
        // Strictly increasing physical index within each field.
        for field in [FieldTag::HtLtf, FieldTag::LLtf] {
            let idx: Vec<i32> = subcarriers
                .iter()
                .filter(|s| s.field == field)
                .map(|s| s.index)
                .collect();
            if idx.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config(format!(
                    "{} physical indices must be strictly increasing",
                    field.as_str()
                )));
            }
        }
        Ok(Self { subcarriers })
    }

    /// HT-LTF subcarriers, physical indices `[-58, -2] ∪ [2, 58]`.
    pub fn ht_ltf() -> Self {
        let subcarriers = (-58..=58)
            .filter(|n: &i32| n.abs() >= 2)
            .map(|n| Self::at(FieldTag::HtLtf, n))
            .collect();
        Self { subcarriers }
    }

    /// L-LTF subcarriers duplicated over both 20 MHz halves.
    pub fn l_ltf() -> Self {
        let legacy: Vec<i32> = (-26..=26).filter(|n: &i32| *n != 0).collect();
        let subcarriers = legacy
            .iter()
            .map(|n| n - 32)
            .chain(legacy.iter().map(|n| n + 32))
            .map(|n| Self::at(FieldTag::LLtf, n))
            .collect();
        Self { subcarriers }
    }

    /// HT-LTF followed by L-LTF: 218 subcarriers.
    pub fn combined() -> Self {
        let mut subcarriers = Self::ht_ltf().subcarriers;
        subcarriers.extend(Self::l_ltf().subcarriers);
        Self { subcarriers }
    }

    /// A small grid of `count` HT-LTF subcarriers evenly spread over the
    /// band; used for toy problems.
    pub fn toy(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("subcarrier grid is empty".into()));
        }
        let full = Self::ht_ltf();
        let last = full.len() - 1;
        let subcarriers = (0..count)
            .map(|i| {
                let m = if count == 1 { 0 } else { i * last / (count - 1) };
                full.subcarriers[m]
            })
            .collect();
        Self::new(subcarriers)
    }

    fn at(field: FieldTag, n: i32) -> Subcarrier {
        Subcarrier {
            field,
            index: n,
            freq_hz: CHANNEL_11_40MHZ_CENTER_HZ + f64::from(n) * SUBCARRIER_SPACING_HZ,
        }
    }

    pub fn len(&self) -> usize {
        self.subcarriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subcarriers.is_empty()
    }

    pub fn get(&self, m: usize) -> Option<&Subcarrier> {
        self.subcarriers.get(m)
    }

    pub fn subcarriers(&self) -> &[Subcarrier] {
        &self.subcarriers
    }

    pub fn physical_index(&self, m: usize) -> i32 {
        self.subcarriers[m].index
    }

    pub fn wavelength(&self, m: usize) -> f64 {
        self.subcarriers[m].wavelength_m()
    }

    /// Grid position of the HT-LTF pair with the widest frequency separation,
    /// falling back to the first and last columns.
    pub fn widest_pair(&self) -> (usize, usize) {
        let (lo, hi) = self
            .subcarriers
            .iter()
            .enumerate()
            .fold((0, 0), |(lo, hi), (m, s)| {
                let lo = if s.freq_hz < self.subcarriers[lo].freq_hz { m } else { lo };
                let hi = if s.freq_hz > self.subcarriers[hi].freq_hz { m } else { hi };
                (lo, hi)
            });
        if lo == hi {
            (0, self.len().saturating_sub(1))
        } else {
            (hi, lo)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_sizes() {
        assert_eq!(SubcarrierGrid::ht_ltf().len(), 114);
        assert_eq!(SubcarrierGrid::l_ltf().len(), 104);
        assert_eq!(SubcarrierGrid::combined().len(), 218);
    }

    #[test]
    fn frequencies_within_channel_band() {
        for sc in SubcarrierGrid::combined().subcarriers() {
            assert!(sc.freq_hz >= 2_433.875e6 - 1e-3, "{sc:?}");
            assert!(sc.freq_hz <= 2_470.125e6 + 1e-3, "{sc:?}");
            let rel = (sc.wavelength_m() * sc.freq_hz - SPEED_OF_LIGHT).abs() / SPEED_OF_LIGHT;
            assert!(rel < 1e-15);
        }
    }

    #[test]
    fn ht_ltf_index_map_matches_known_positions() {
        let g = SubcarrierGrid::ht_ltf();
        assert_eq!(g.physical_index(0), -58);
        assert_eq!(g.physical_index(56), -2);
        assert_eq!(g.physical_index(57), 2);
        assert_eq!(g.physical_index(113), 58);
        assert!((g.get(0).unwrap().freq_hz - 2_433.875e6).abs() < 1e-3);
        assert!((g.get(113).unwrap().freq_hz - 2_470.125e6).abs() < 1e-3);
    }

    #[test]
    fn physical_indices_strictly_increasing_per_field() {
        let g = SubcarrierGrid::combined();
        for field in [FieldTag::HtLtf, FieldTag::LLtf] {
            let idx: Vec<i32> = g
                .subcarriers()
                .iter()
                .filter(|s| s.field == field)
                .map(|s| s.index)
                .collect();
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
        }
        for sc in SubcarrierGrid::ht_ltf().subcarriers() {
            assert!((2..=58).contains(&sc.index.abs()));
        }
    }

    #[test]
    fn rejects_empty_and_unordered() {
        assert!(SubcarrierGrid::new(vec![]).is_err());
        let g = SubcarrierGrid::ht_ltf();
        let mut v = g.subcarriers().to_vec();
        v.swap(0, 1);
        assert!(SubcarrierGrid::new(v).is_err());
    }

    #[test]
    fn widest_pair_spans_band() {
        let g = SubcarrierGrid::combined();
        let (a, b) = g.widest_pair();
        assert_eq!(g.physical_index(a), 58);
        assert_eq!(g.physical_index(b), -58);
    }
}
