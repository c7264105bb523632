use crate::error::{Error, Result};
use crate::index_set::IndexSet;

/// Frozen positions of a length-`n` input vector and the values they carry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenPattern {
    n: usize,
    frozen: IndexSet,
    /// `Some(bit)` at frozen positions, `None` at free ones.
    lookup: Vec<Option<u8>>,
}

impl FrozenPattern {
    /// Frozen set with explicit values, listed in increasing index order.
    pub fn new(n: usize, frozen: IndexSet, values: &[u8]) -> Result<Self> {
        if frozen.max().is_some_and(|i| i >= n) {
            return Err(Error::InvalidParameter(format!(
                "frozen index {} is out of range for n = {n}",
                frozen.max().unwrap_or(0) + 1
            )));
        }
        if values.len() != frozen.len() {
            return Err(Error::DimensionMismatch {
                context: "frozen values",
                expected: frozen.len(),
                actual: values.len(),
            });
        }
        let mut lookup = vec![None; n];
        for (i, &b) in frozen.iter().zip(values) {
            lookup[i] = Some(b & 1);
        }
        Ok(Self { n, frozen, lookup })
    }

    /// Frozen set carrying zeros.
    pub fn zeros(n: usize, frozen: IndexSet) -> Result<Self> {
        let values = vec![0; frozen.len()];
        Self::new(n, frozen, &values)
    }

    /// Every position free.
    pub fn none(n: usize) -> Self {
        Self {
            n,
            frozen: IndexSet::new(),
            lookup: vec![None; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frozen_set(&self) -> &IndexSet {
        &self.frozen
    }

    pub fn free_set(&self) -> IndexSet {
        self.frozen.complement(self.n)
    }

    pub fn value(&self, i: usize) -> Option<u8> {
        self.lookup[i]
    }
}
