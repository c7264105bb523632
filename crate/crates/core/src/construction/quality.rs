use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::log2_len;

/// How a quality table was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QualityMethod {
    Exact,
    Quantized { mu: usize },
    BruteForce,
}

/// Certified bounds for one bit-channel.
///
/// `gap_*` bound `1 - Z` and are kept separately so that Bhattacharyya
/// parameters close to one do not lose their precision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitChannelBounds {
    pub z_lower: f64,
    pub z_upper: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub gap_lower: f64,
    pub gap_upper: f64,
}

impl BitChannelBounds {
    /// Bounds that coincide.
    pub fn exact(z: f64, c: f64, gap: f64) -> Self {
        Self {
            z_lower: z,
            z_upper: z,
            c_lower: c,
            c_upper: c,
            gap_lower: gap,
            gap_upper: gap,
        }
    }
}

/// Per-index bounds on `Z(W_i)` and `C(W_i)` for one block length.
#[derive(Clone, Debug, PartialEq)]
pub struct BitChannelQuality {
    bounds: Vec<BitChannelBounds>,
    method: QualityMethod,
}

impl BitChannelQuality {
    pub fn new(bounds: Vec<BitChannelBounds>, method: QualityMethod) -> Result<Self> {
        log2_len(bounds.len())?;
        let q = Self { bounds, method };
        q.validate()?;
        Ok(q)
    }

    pub(crate) fn new_unchecked(bounds: Vec<BitChannelBounds>, method: QualityMethod) -> Self {
        Self { bounds, method }
    }

    fn validate(&self) -> Result<()> {
        for (i, b) in self.bounds.iter().enumerate() {
            let ordered = 0.0 <= b.z_lower
                && b.z_lower <= b.z_upper
                && b.z_upper <= 1.0
                && 0.0 <= b.c_lower
                && b.c_lower <= b.c_upper
                && b.c_upper <= 1.0
                && 0.0 <= b.gap_lower
                && b.gap_lower <= b.gap_upper
                && b.gap_upper <= 1.0;
            if !ordered {
                return Err(Error::Format(format!(
                    "bounds at index {} are not ordered: {b:?}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.bounds.len()
    }

    pub fn m(&self) -> u32 {
        self.bounds.len().trailing_zeros()
    }

    pub fn method(&self) -> QualityMethod {
        self.method
    }

    pub fn bounds(&self) -> &[BitChannelBounds] {
        &self.bounds
    }

    pub fn get(&self, i: usize) -> &BitChannelBounds {
        &self.bounds[i]
    }

    /// `sum_i z_upper(i)` over the given indices.
    pub fn sum_z_upper(&self, indices: impl IntoIterator<Item = usize>) -> f64 {
        indices.into_iter().map(|i| self.bounds[i].z_upper).sum()
    }

    /// `(sum c_lower, sum c_upper)` over all indices.
    pub fn total_capacity(&self) -> (f64, f64) {
        self.bounds
            .iter()
            .fold((0.0, 0.0), |(lo, hi), b| (lo + b.c_lower, hi + b.c_upper))
    }
}
