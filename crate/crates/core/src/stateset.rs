use std::cmp::Ordering;
use std::fmt;

use crate::model::StateId;

/// Fixed-width bit-set over the states of one model.
///
/// Sets built for the same model always have the same word count, so the
/// derived equality and hashing are the set equality and hashing.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    words: Box<[u64]>,
}

impl StateSet {
    pub fn new(num_states: usize) -> Self {
        let len = num_states.div_ceil(64).max(1);
        StateSet {
            words: vec![0; len].into_boxed_slice(),
        }
    }

    pub fn full(num_states: usize) -> Self {
        let mut s = Self::new(num_states);
        for i in 0..num_states {
            s.insert(i);
        }
        s
    }

    pub fn from_states<I: IntoIterator<Item = StateId>>(num_states: usize, states: I) -> Self {
        let mut s = Self::new(num_states);
        for i in states {
            s.insert(i);
        }
        s
    }

    /// Number of states this set can hold without growing.
    pub fn capacity(&self) -> usize {
        self.words.len() * 64
    }

    #[inline]
    pub fn insert(&mut self, i: StateId) -> bool {
        let (w, m) = (i / 64, 1u64 << (i % 64));
        let was = self.words[w] & m != 0;
        self.words[w] |= m;
        !was
    }

    #[inline]
    pub fn remove(&mut self, i: StateId) -> bool {
        let (w, m) = (i / 64, 1u64 << (i % 64));
        let was = self.words[w] & m != 0;
        self.words[w] &= !m;
        was
    }

    #[inline]
    pub fn contains(&self, i: StateId) -> bool {
        let w = i / 64;
        w < self.words.len() && self.words[w] & (1u64 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_superset(&self, other: &StateSet) -> bool {
        other.is_subset(self)
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= b;
        }
    }

    pub fn union_with(&mut self, other: &StateSet) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    pub fn first(&self) -> Option<StateId> {
        self.iter().next()
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            word: 0,
            cur: self.words[0],
        }
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    word: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = StateId;

    fn next(&mut self) -> Option<StateId> {
        loop {
            if self.cur != 0 {
                let bit = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.word * 64 + bit);
            }
            self.word += 1;
            if self.word >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.word];
        }
    }
}

impl<'a> IntoIterator for &'a StateSet {
    type Item = StateId;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

/// Lexicographic order on the sorted member lists.
impl Ord for StateSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for StateSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_across_words() {
        let mut s = StateSet::new(130);
        for i in [0, 63, 64, 127, 129] {
            assert!(s.insert(i));
            assert!(!s.insert(i));
        }
        assert_eq!(s.len(), 5);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 63, 64, 127, 129]);
        assert!(s.remove(64));
        assert!(!s.contains(64));
        assert_eq!(s.to_string(), "{0,63,127,129}");
    }

    #[test]
    fn subset_and_order() {
        let a = StateSet::from_states(10, [1, 3]);
        let b = StateSet::from_states(10, [1, 2, 3]);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert!(b < a, "[1,2,3] sorts before [1,3]");
        assert!(StateSet::new(10).is_empty());
    }
}
