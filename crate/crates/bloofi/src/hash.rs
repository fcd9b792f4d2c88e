use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A family of `k` multiplicative hash functions over unsigned 64-bit
/// elements, `h_j(x) = (a_j * x) mod m`, where each multiplier `a_j` is an
/// odd 64-bit integer and the product wraps in 64-bit arithmetic before the
/// reduction.
///
/// Every filter indexed together must share one family: the bitwise OR of
/// two filters is only meaningful when both were built with the same `m`
/// and the same multipliers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashFamily {
    m: usize,
    multipliers: Vec<u64>,
}

impl HashFamily {
    /// Draws `k` odd multipliers from a ChaCha stream seeded with `seed`,
    /// so a family is reproducible from `(k, m, seed)` alone.
    pub fn generate(k: usize, m: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let multipliers = (0..k).map(|_| rng.next_u64() | 1).collect();
        Self::with_multipliers(m, multipliers)
    }

    /// Builds a family from explicit multipliers. Every multiplier must be
    /// odd and there must be at least one.
    pub fn with_multipliers(m: usize, multipliers: Vec<u64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("hash range m must be positive".into()));
        }
        if multipliers.is_empty() {
            return Err(Error::InvalidParameter(
                "a hash family needs at least one multiplier".into(),
            ));
        }
        if let Some(a) = multipliers.iter().find(|a| *a % 2 == 0) {
            return Err(Error::InvalidParameter(format!("multiplier {a} is even")));
        }
        Ok(HashFamily { m, multipliers })
    }

    /// Number of hash functions.
    pub fn k(&self) -> usize {
        self.multipliers.len()
    }

    /// Range of each function; also the bit length of compatible filters.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn multipliers(&self) -> &[u64] {
        &self.multipliers
    }

    /// The `k` bit positions for `element`, one per hash function, each in
    /// `[0, m)`.
    pub fn positions(&self, element: u64) -> Vec<usize> {
        self.multipliers
            .iter()
            .map(|&a| (a.wrapping_mul(element) % self.m as u64) as usize)
            .collect()
    }
}
