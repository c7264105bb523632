//! Sorted index sets over `[n]`.
//!
//! Indices are 0-based in memory. Serialization and `Display` use the 1-based
//! convention of the reports.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Builds a set from arbitrary 0-based indices; duplicates are dropped.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// `{ i in 0..n : keep(i) }`.
    pub fn filter(n: usize, mut keep: impl FnMut(usize) -> bool) -> Self {
        Self((0..n).filter(|&i| keep(i)).collect())
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_indices(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self(self.iter().filter(|&i| other.contains(i)).collect())
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn complement(&self, n: usize) -> Self {
        Self::filter(n, |i| !self.contains(i))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.iter().all(|i| !other.contains(i))
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for i in self.iter() {
            mask[i] = true;
        }
        mask
    }

    /// 1-based indices, as written in reports and spec files.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn from_one_based(indices: &[usize]) -> Result<Self, String> {
        if let Some(bad) = indices.iter().find(|&&i| i == 0) {
            return Err(format!("index {bad} is not 1-based"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err("indices must be strictly increasing".into());
        }
        Ok(Self(indices.iter().map(|i| i - 1).collect()))
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_indices(iter)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(deserializer)?;
        Self::from_one_based(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = IndexSet::from_indices([3, 1, 2, 3]);
        let b = IndexSet::from_indices([2, 5]);
        assert_eq!(a.as_slice(), &[1, 2, 3]);
        assert_eq!(a.union(&b).as_slice(), &[1, 2, 3, 5]);
        assert_eq!(a.intersection(&b).as_slice(), &[2]);
        assert_eq!(a.difference(&b).as_slice(), &[1, 3]);
        assert_eq!(a.complement(6).as_slice(), &[0, 4, 5]);
        assert!(IndexSet::new().is_subset(&a));
    }

    #[test]
    fn json_is_one_based() {
        let a = IndexSet::from_indices([0, 4]);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[1,5]");
        let back: IndexSet = serde_json::from_str("[1,5]").unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<IndexSet>("[0,2]").is_err());
        assert!(serde_json::from_str::<IndexSet>("[3,2]").is_err());
        assert_eq!(a.to_string(), "{1, 5}");
    }
}
