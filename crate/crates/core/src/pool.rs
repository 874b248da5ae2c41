use std::fmt;

use fixedbitset::FixedBitSet;

use crate::instance::ItemSet;

/// A set of items submitted to one test. Backed by a bitset indexed by item
/// (bit 0 is never used since items start at 1).
#[derive(Clone, Default)]
pub struct Pool {
    bits: FixedBitSet,
}

impl Pool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Empty pool with room for items `1..=n` without reallocation.
    pub fn with_universe(n: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(n + 1),
        }
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Self {
        let mut pool = Self::new();
        pool.extend(items);
        pool
    }

    pub fn insert(&mut self, item: usize) {
        self.bits.grow(item + 1);
        self.bits.insert(item);
    }

    pub fn extend<I: IntoIterator<Item = usize>>(&mut self, items: I) {
        for item in items {
            self.insert(item);
        }
    }

    pub fn contains(&self, item: usize) -> bool {
        self.bits.contains(item)
    }

    pub fn union_with(&mut self, other: &Pool) {
        self.bits.union_with(&other.bits);
    }

    pub fn union(&self, other: &Pool) -> Pool {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_disjoint(&self, other: &Pool) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &Pool) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Items in increasing order.
    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_item_set(&self) -> ItemSet {
        self.items().collect()
    }

    pub fn max_item(&self) -> Option<usize> {
        self.bits.maximum()
    }

    /// First item outside `1..=n`, if any.
    pub fn out_of_range(&self, n: usize) -> Option<usize> {
        if self.contains(0) {
            return Some(0);
        }
        self.max_item().filter(|&max| max > n)
    }
}

impl PartialEq for Pool {
    fn eq(&self, other: &Self) -> bool {
        self.items().eq(other.items())
    }
}

impl Eq for Pool {}

impl fmt::Debug for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.items()).finish()
    }
}

impl FromIterator<usize> for Pool {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_items(iter)
    }
}

impl From<&ItemSet> for Pool {
    fn from(set: &ItemSet) -> Self {
        Self::from_items(set.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_ignores_capacity() {
        let mut a = Pool::with_universe(100);
        a.insert(3);
        let b = Pool::from_items([3]);
        assert_eq!(a, b);
        assert_ne!(a, Pool::from_items([3, 4]));
    }

    #[test]
    fn range_check() {
        assert_eq!(Pool::from_items([1, 5]).out_of_range(4), Some(5));
        assert_eq!(Pool::from_items([0, 2]).out_of_range(4), Some(0));
        assert_eq!(Pool::from_items([1, 4]).out_of_range(4), None);
        assert_eq!(Pool::new().out_of_range(4), None);
    }

    #[test]
    fn union_and_subset() {
        let a = Pool::from_items([1, 2]);
        let b = Pool::from_items([2, 7]);
        let u = a.union(&b);
        assert_eq!(u.items().collect::<Vec<_>>(), vec![1, 2, 7]);
        assert!(a.is_subset(&u));
        assert!(!a.is_disjoint(&b));
        assert_eq!(u.len(), 3);
    }
}
