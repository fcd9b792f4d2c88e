use std::fmt;

use crate::error::{Error, Result};

/// Width of the backing words. Filter lengths are rounded up to a multiple
/// of this so that word-level operations never need per-bit masking.
pub const WORD_BITS: usize = 64;

/// A fixed-length bit vector backed by 64-bit words.
///
/// Bit `i` lives in word `i / 64` at bit position `i % 64`. Bits at
/// positions `>= len()` (padding in the last word) are kept zero by every
/// operation, so word-wise popcounts and boolean combinations are exact.
#[derive(Clone, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    /// Creates an all-zero vector of `len_bits` logical bits.
    pub fn new(len_bits: usize) -> Self {
        let words = vec![0u64; len_bits.div_ceil(WORD_BITS)];
        BitVector { words, len: len_bits }
    }

    /// Reassembles a vector from raw words, e.g. when reading a collection
    /// file. Fails if the word count does not match `len_bits` or if any
    /// padding bit is set.
    pub fn from_words(words: Vec<u64>, len_bits: usize) -> Result<Self> {
        if words.len() != len_bits.div_ceil(WORD_BITS) {
            return Err(Error::InvalidParameter(format!(
                "{} words cannot back {} bits",
                words.len(),
                len_bits
            )));
        }
        let v = BitVector { words, len: len_bits };
        if !v.padding_is_zero() {
            return Err(Error::Corrupt("nonzero padding bits".to_string()));
        }
        Ok(v)
    }

    /// Parses a string of `0`/`1` characters; character `i` becomes bit `i`.
    ///
    /// This mirrors the usual left-to-right way short filters are written
    /// out in docs and tests ("00001000" has bit 4 set).
    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut v = BitVector::new(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "bit string may only contain 0 and 1, found {other:?}"
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    /// Number of logical bits.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, bit: usize) -> bool {
        assert!(bit < self.len, "bit index {bit} out of range for length {}", self.len);
        self.words[bit / WORD_BITS] >> (bit % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.len, "bit index {bit} out of range for length {}", self.len);
        self.words[bit / WORD_BITS] |= 1u64 << (bit % WORD_BITS);
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// True iff every logical bit is set.
    pub fn is_all_ones(&self) -> bool {
        self.count_ones() as usize == self.len
    }

    /// `self |= source`, bit-exact. Both vectors must have the same length.
    pub fn union_with(&mut self, source: &BitVector) {
        assert_eq!(self.len, source.len, "union of bit vectors of different lengths");
        for (t, s) in self.words.iter_mut().zip(&source.words) {
            *t |= s;
        }
    }

    /// True iff every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "subset test on bit vectors of different lengths");
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn xor_count_ones(&self, other: &BitVector) -> u64 {
        assert_eq!(self.len, other.len, "xor of bit vectors of different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| u64::from((a ^ b).count_ones()))
            .sum()
    }

    pub fn and_count_ones(&self, other: &BitVector) -> u64 {
        assert_eq!(self.len, other.len, "and of bit vectors of different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| u64::from((a & b).count_ones()))
            .sum()
    }

    pub fn or_count_ones(&self, other: &BitVector) -> u64 {
        assert_eq!(self.len, other.len, "or of bit vectors of different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| u64::from((a | b).count_ones()))
            .sum()
    }

    /// Iterates over the indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rem = w;
            std::iter::from_fn(move || {
                if rem == 0 {
                    None
                } else {
                    let tz = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    fn padding_is_zero(&self) -> bool {
        let tail = self.len % WORD_BITS;
        if tail == 0 || self.words.is_empty() {
            return true;
        }
        let mask = !0u64 << tail;
        self.words[self.words.len() - 1] & mask == 0
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitVector({})", self.to_bit_string())
        } else {
            write!(f, "BitVector(len={}, ones={})", self.len, self.count_ones())
        }
    }
}
