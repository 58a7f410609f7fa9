//! Dense bit-vector sets over attribute and object indices.
//!
//! The two set types are deliberately distinct so that object indices and
//! attribute indices cannot be mixed up. Both wrap the same word-level
//! representation; trailing bits past the dimension are always zero, which
//! keeps equality, hashing and popcounts exact.

use std::fmt;
use std::hash::{Hash, Hasher};

const WORD_BITS: usize = 64;

#[inline]
fn word_count(nbits: usize) -> usize {
    nbits.div_ceil(WORD_BITS)
}

/// Shared word-level implementation behind [`AttributeSet`] and [`ObjectSet`].
#[derive(Clone, PartialEq, Eq)]
struct Bits {
    words: Vec<u64>,
    nbits: usize,
}

impl Bits {
    fn new(nbits: usize) -> Self {
        Bits {
            words: vec![0; word_count(nbits)],
            nbits,
        }
    }

    fn full(nbits: usize) -> Self {
        let mut b = Bits {
            words: vec![!0u64; word_count(nbits)],
            nbits,
        };
        b.mask_tail();
        b
    }

    /// Zeroes bits past `nbits` so whole-word ops stay exact.
    #[inline]
    fn mask_tail(&mut self) {
        let rem = self.nbits % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.nbits);
        self.words[i / WORD_BITS] & (1u64 << (i % WORD_BITS)) != 0
    }

    #[inline]
    fn insert(&mut self, i: usize) {
        assert!(i < self.nbits, "bit index {i} out of range {}", self.nbits);
        self.words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
    }

    #[inline]
    fn remove(&mut self, i: usize) {
        assert!(i < self.nbits, "bit index {i} out of range {}", self.nbits);
        self.words[i / WORD_BITS] &= !(1u64 << (i % WORD_BITS));
    }

    #[inline]
    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    #[inline]
    fn intersect_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.nbits, other.nbits);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    #[inline]
    fn union_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.nbits, other.nbits);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    #[inline]
    fn difference_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.nbits, other.nbits);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    #[inline]
    fn is_subset(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.nbits, other.nbits);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    fn iter(&self) -> BitIter<'_> {
        BitIter {
            words: &self.words,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }
}

/// Ascending iterator over set bit indices.
pub struct BitIter<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
        let bit = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some(self.word_idx * WORD_BITS + bit)
    }
}

macro_rules! bitset_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq)]
        pub struct $name(Bits);

        impl $name {
            /// Empty set over a universe of `nbits` indices.
            pub fn new(nbits: usize) -> Self {
                $name(Bits::new(nbits))
            }

            /// Set containing every index below `nbits`.
            pub fn full(nbits: usize) -> Self {
                $name(Bits::full(nbits))
            }

            pub fn from_indices<I: IntoIterator<Item = usize>>(nbits: usize, indices: I) -> Self {
                let mut s = Self::new(nbits);
                for i in indices {
                    s.insert(i);
                }
                s
            }

            /// Size of the universe, not the cardinality.
            #[inline]
            pub fn dimension(&self) -> usize {
                self.0.nbits
            }

            #[inline]
            pub fn contains(&self, i: usize) -> bool {
                self.0.contains(i)
            }

            #[inline]
            pub fn insert(&mut self, i: usize) {
                self.0.insert(i)
            }

            #[inline]
            pub fn remove(&mut self, i: usize) {
                self.0.remove(i)
            }

            /// Cardinality.
            #[inline]
            pub fn count(&self) -> usize {
                self.0.count()
            }

            #[inline]
            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            #[inline]
            pub fn intersect_with(&mut self, other: &Self) {
                self.0.intersect_with(&other.0)
            }

            #[inline]
            pub fn union_with(&mut self, other: &Self) {
                self.0.union_with(&other.0)
            }

            #[inline]
            pub fn difference_with(&mut self, other: &Self) {
                self.0.difference_with(&other.0)
            }

            #[inline]
            pub fn is_subset(&self, other: &Self) -> bool {
                self.0.is_subset(&other.0)
            }

            #[inline]
            pub fn is_proper_subset(&self, other: &Self) -> bool {
                self.0.is_subset(&other.0) && self.0 != other.0
            }

            pub fn intersection(&self, other: &Self) -> Self {
                let mut out = self.clone();
                out.intersect_with(other);
                out
            }

            pub fn union(&self, other: &Self) -> Self {
                let mut out = self.clone();
                out.union_with(other);
                out
            }

            pub fn iter(&self) -> BitIter<'_> {
                self.0.iter()
            }

            pub fn to_indices(&self) -> Vec<usize> {
                self.iter().collect()
            }

            /// Raw words; trailing bits past the dimension are zero.
            #[inline]
            pub fn words(&self) -> &[u64] {
                &self.0.words
            }

            /// Lexicographic order on the ascending index sequence.
            ///
            /// `{1} < {1,2}` (prefix) and `{1,2} < {1,3}`; used as the
            /// canonical tie-break wherever a deterministic set order is
            /// needed.
            pub fn cmp_canonical(&self, other: &Self) -> std::cmp::Ordering {
                self.iter().cmp(other.iter())
            }
        }

        // Hash over the words only: sets in one map share a dimension, and
        // word slices then hash compatibly for borrowed lookups.
        impl Hash for $name {
            fn hash<H: Hasher>(&self, state: &mut H) {
                self.0.words.hash(state);
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{{", stringify!($name))?;
                for (k, i) in self.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{i}")?;
                }
                write!(f, "}}")
            }
        }
    };
}

bitset_type!(
    /// A set of attribute (column) indices: an itemset.
    AttributeSet
);
bitset_type!(
    /// A set of object (row) indices: an extent or a sampling mask.
    ObjectSet
);
