use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};
use std::fmt;

/// A set of cell indices over a fixed universe `0..universe`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CellSet {
    bits: FixedBitSet,
}

impl CellSet {
    pub fn empty(universe: usize) -> Self {
        CellSet {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        CellSet { bits }
    }

    pub fn from_cells(universe: usize, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for c in cells {
            s.insert(c);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    /// Returns true if `c` was newly inserted.
    pub fn insert(&mut self, c: usize) -> bool {
        !self.bits.put(c)
    }

    pub fn remove(&mut self, c: usize) {
        self.bits.set(c, false);
    }

    pub fn contains(&self, c: usize) -> bool {
        self.bits.contains(c)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn min(&self) -> Option<usize> {
        self.bits.minimum()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &CellSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &CellSet) {
        self.bits.intersect_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &CellSet) {
        self.bits.difference_with(&other.bits);
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &CellSet) -> CellSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn complement(&self) -> CellSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        CellSet { bits }
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &CellSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for CellSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = CellSet::from_cells(10, [1, 3, 5]);
        let b = CellSet::from_cells(10, [3, 4]);
        assert_eq!(a.union(&b).to_vec(), vec![1, 3, 4, 5]);
        assert_eq!(a.intersection(&b).to_vec(), vec![3]);
        assert_eq!(a.difference(&b).to_vec(), vec![1, 5]);
        assert_eq!(b.complement().len(), 8);
        assert!(CellSet::from_cells(10, [3]).is_subset(&a));
        assert_eq!(CellSet::full(10).len(), 10);
        assert_eq!(a.min(), Some(1));
    }
}
