//! Sets of grid cells.

use alloc::vec;
use alloc::vec::Vec;

/// A sorted, duplicate-free set of cell ids drawn from `0..universe`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoxSet {
    ids: Vec<usize>,
    universe: usize,
}

impl BoxSet {
    pub fn empty(universe: usize) -> Self {
        BoxSet { ids: Vec::new(), universe }
    }

    pub fn full(universe: usize) -> Self {
        BoxSet {
            ids: (0..universe).collect(),
            universe,
        }
    }

    /// Sorts and deduplicates `ids`. Panics on ids outside the universe.
    pub fn from_ids(universe: usize, mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        if let Some(&last) = ids.last() {
            assert!(last < universe, "cell id {last} outside grid of {universe} cells");
        }
        BoxSet { ids, universe }
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        BoxSet {
            ids: mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect(),
            universe: mask.len(),
        }
    }

    pub fn to_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.universe];
        for &i in &self.ids {
            m[i] = true;
        }
        m
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids.iter().copied()
    }

    pub fn is_subset(&self, other: &BoxSet) -> bool {
        let mut j = 0;
        for &a in &self.ids {
            while j < other.ids.len() && other.ids[j] < a {
                j += 1;
            }
            if j == other.ids.len() || other.ids[j] != a {
                return false;
            }
        }
        true
    }

    pub fn union(&self, other: &BoxSet) -> BoxSet {
        debug_assert_eq!(self.universe, other.universe);
        let mut out = Vec::with_capacity(self.ids.len() + other.ids.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            let (a, b) = (self.ids[i], other.ids[j]);
            if a < b {
                out.push(a);
                i += 1;
            } else if b < a {
                out.push(b);
                j += 1;
            } else {
                out.push(a);
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&self.ids[i..]);
        out.extend_from_slice(&other.ids[j..]);
        BoxSet {
            ids: out,
            universe: self.universe,
        }
    }

    pub fn intersection(&self, other: &BoxSet) -> BoxSet {
        debug_assert_eq!(self.universe, other.universe);
        let ids = self.ids.iter().copied().filter(|&a| other.contains(a)).collect();
        BoxSet {
            ids,
            universe: self.universe,
        }
    }

    pub fn difference(&self, other: &BoxSet) -> BoxSet {
        debug_assert_eq!(self.universe, other.universe);
        let ids = self.ids.iter().copied().filter(|&a| !other.contains(a)).collect();
        BoxSet {
            ids,
            universe: self.universe,
        }
    }

    pub fn complement(&self) -> BoxSet {
        BoxSet::full(self.universe).difference(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = BoxSet::from_ids(10, vec![5, 1, 3, 3]);
        let b = BoxSet::from_ids(10, vec![3, 4, 5]);
        assert_eq!(a.ids(), &[1, 3, 5]);
        assert_eq!(a.union(&b).ids(), &[1, 3, 4, 5]);
        assert_eq!(a.intersection(&b).ids(), &[3, 5]);
        assert_eq!(a.difference(&b).ids(), &[1]);
        assert!(a.intersection(&b).is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(a.complement().len(), 7);
        assert_eq!(BoxSet::from_mask(&a.to_mask()), a);
    }

    #[test]
    #[should_panic]
    fn ids_must_be_in_universe() {
        BoxSet::from_ids(3, vec![3]);
    }
}
