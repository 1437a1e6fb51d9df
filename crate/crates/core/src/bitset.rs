//! Fixed-width bitset used for regions, correspondence fibers and hyperspace
//! elements. Words past `len` are always zero so derived equality and hashing
//! are extensional.

use smallvec::SmallVec;
use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitSet {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        let n = len.div_ceil(WORD);
        Self {
            len,
            words: SmallVec::from_elem(0, n),
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.trim();
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut s = Self::new(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Builds a set from the low `len` bits of `mask`. `len` must be at most 64.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= WORD, "from_mask supports at most 64 bits");
        let mut s = Self::new(len);
        if len > 0 {
            s.words[0] = mask;
            s.trim();
        }
        s
    }

    /// The set as a `u64` mask. Panics if `len > 64`.
    pub fn to_mask(&self) -> u64 {
        assert!(self.len <= WORD, "to_mask supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn singleton(len: usize, i: usize) -> Self {
        let mut s = Self::new(len);
        s.insert(i);
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn union(&self, other: &BitSet) -> BitSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn complement(&self) -> BitSet {
        let mut s = self.clone();
        for w in s.words.iter_mut() {
            *w = !*w;
        }
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn ones(&self) -> Ones<'_> {
        Ones {
            set: self,
            word: 0,
            bits: self.words.first().copied().unwrap_or(0),
        }
    }

    fn trim(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

pub struct Ones<'a> {
    set: &'a BitSet,
    word: usize,
    bits: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.bits != 0 {
                let t = self.bits.trailing_zeros() as usize;
                self.bits &= self.bits - 1;
                return Some(self.word * WORD + t);
            }
            self.word += 1;
            if self.word >= self.set.words.len() {
                return None;
            }
            self.bits = self.set.words[self.word];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops_across_word_boundary() {
        let a = BitSet::from_indices(130, [0, 63, 64, 129]);
        let b = BitSet::from_indices(130, [63, 100]);
        assert_eq!(a.intersection(&b).ones().collect::<Vec<_>>(), vec![63]);
        assert_eq!(a.union(&b).count(), 5);
        assert_eq!(a.complement().count(), 126);
        assert!(BitSet::new(130).is_subset(&a));
        assert_eq!(BitSet::full(130).complement(), BitSet::new(130));
    }

    #[test]
    fn mask_round_trip() {
        let s = BitSet::from_mask(5, 0b1_0110);
        assert_eq!(s.ones().collect::<Vec<_>>(), vec![1, 2, 4]);
        assert_eq!(s.to_mask(), 0b1_0110);
        // bits past len are dropped
        assert_eq!(BitSet::from_mask(3, 0xff).to_mask(), 0b111);
    }
}
