//! Bitmask sets of variables.
//!
//! Variables are identified by their position in the model's canonical
//! order, so a set of variables fits in a `u64`. Iteration is always in
//! ascending canonical order, which is also the order used for the
//! coordinates of marginal cells.

use std::fmt;

pub const MAX_VARIABLES: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VarSet(pub u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn singleton(v: usize) -> Self {
        VarSet(1u64 << v)
    }

    pub fn full(n: usize) -> Self {
        if n == 64 {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, v: usize) -> bool {
        v < 64 && self.0 & (1u64 << v) != 0
    }

    pub fn with(self, v: usize) -> Self {
        VarSet(self.0 | (1u64 << v))
    }

    pub fn without(self, v: usize) -> Self {
        VarSet(self.0 & !(1u64 << v))
    }

    pub fn union(self, other: VarSet) -> Self {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> Self {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: VarSet) -> Self {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: VarSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Members strictly greater than `v`.
    pub fn above(self, v: usize) -> Self {
        if v >= 63 {
            VarSet::EMPTY
        } else {
            VarSet(self.0 & (u64::MAX << (v + 1)))
        }
    }

    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    pub fn iter(self) -> Members {
        Members(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Position of `v` among the members of `self`.
    pub fn rank(self, v: usize) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let below = self.0 & ((1u64 << v) - 1);
        Some(below.count_ones() as usize)
    }

    /// All subsets including the empty set and `self`, in increasing bitmask order.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }

    /// All nonempty subsets.
    pub fn nonempty_subsets(self) -> impl Iterator<Item = VarSet> {
        self.subsets().filter(|s| !s.is_empty())
    }

    /// Canonical ordering key: by size, then lexicographic on members.
    pub fn canonical_key(self) -> (usize, Vec<usize>) {
        (self.len(), self.to_vec())
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(VarSet::EMPTY, |s, v| s.with(v))
    }
}

pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = VarSet;

    fn next(&mut self) -> Option<VarSet> {
        let cur = self.next?;
        // Enumerates subsets of `mask` in increasing numeric order.
        self.next = if cur == self.mask {
            None
        } else {
            Some((cur.wrapping_sub(self.mask)) & self.mask)
        };
        Some(VarSet(cur))
    }
}

/// Sign of the Möbius coefficient `(-1)^{|outer \ inner|}`.
pub fn mobius_sign(outer: VarSet, inner: VarSet) -> f64 {
    if outer.difference(inner).len().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_power_set() {
        let s = VarSet::from_iter([1, 3, 4]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], VarSet::EMPTY);
        assert_eq!(*subs.last().unwrap(), s);
        assert!(subs.iter().all(|x| x.is_subset(s)));
        let mut bits: Vec<_> = subs.iter().map(|x| x.bits()).collect();
        bits.dedup();
        assert_eq!(bits.len(), 8);
    }

    #[test]
    fn empty_set_has_one_subset() {
        assert_eq!(VarSet::EMPTY.subsets().count(), 1);
        assert_eq!(VarSet::EMPTY.nonempty_subsets().count(), 0);
    }

    #[test]
    fn rank_and_members() {
        let s = VarSet::from_iter([2, 5, 9]);
        assert_eq!(s.to_vec(), vec![2, 5, 9]);
        assert_eq!(s.rank(5), Some(1));
        assert_eq!(s.rank(3), None);
        assert_eq!(s.first(), Some(2));
    }
}
