use std::f64::consts::LN_2;
use std::sync::Arc;

use crate::bitvec::{BitVector, WORD_BITS};
use crate::error::{Error, Result};
use crate::hash::HashFamily;

/// Sizing parameters for a population of Bloom filters, derived from the
/// expected element count and the desired false-positive probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterParams {
    /// Number of hash functions, `ceil(-ln(rho) / ln 2)`.
    pub k: usize,
    /// Filter length in bits: `ceil(k / ln 2 * n_exp)` rounded up to the
    /// next multiple of 64 so the backing words have no partial tail.
    pub m: usize,
    /// Expected element capacity the filter was sized for.
    pub n_exp: u64,
    /// Desired false-positive probability at capacity.
    pub rho_false: f64,
}

/// Computes `k` and `m` for the given capacity and target false-positive
/// probability. `n_exp` must be at least 1 and `rho_false` strictly inside
/// `(0, 1)`.
pub fn derive_params(n_exp: u64, rho_false: f64) -> Result<FilterParams> {
    if n_exp == 0 {
        return Err(Error::InvalidParameter("expected element count must be >= 1".into()));
    }
    if !(rho_false > 0.0 && rho_false < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "false-positive probability must lie in (0, 1), got {rho_false}"
        )));
    }
    let k = (-rho_false.ln() / LN_2).ceil() as usize;
    let raw_m = (k as f64 / LN_2 * n_exp as f64).ceil() as usize;
    let m = raw_m.div_ceil(WORD_BITS) * WORD_BITS;
    Ok(FilterParams { k, m, n_exp, rho_false })
}

impl FilterParams {
    /// Probability that a filter of this shape holding `n` elements matches
    /// an element that was never added: `(1 - e^(-kn/m))^k`.
    pub fn expected_fpp(&self, n: u64) -> f64 {
        expected_fpp(self.k, self.m, n)
    }
}

/// `(1 - e^(-kn/m))^k` for a filter of `m` bits and `k` hash functions
/// holding `n` elements.
pub fn expected_fpp(k: usize, m: usize, n: u64) -> f64 {
    let exponent = -(k as f64) * (n as f64) / (m as f64);
    (1.0 - exponent.exp()).powi(k as i32)
}

/// A Bloom filter: an `m`-bit vector plus a shared hash family. Adding an
/// element sets its `k` hashed positions; a query matches iff all `k`
/// positions are set, so lookups may false-positive but never
/// false-negative.
#[derive(Clone, Debug, PartialEq)]
pub struct BloomFilter {
    bits: BitVector,
    family: Arc<HashFamily>,
}

impl BloomFilter {
    /// An empty filter of the family's length.
    pub fn new(family: Arc<HashFamily>) -> Self {
        let bits = BitVector::new(family.m());
        BloomFilter { bits, family }
    }

    /// Wraps an existing bitmap, e.g. one read back from a collection file.
    /// The bitmap length must equal the family's `m`.
    pub fn from_bits(family: Arc<HashFamily>, bits: BitVector) -> Result<Self> {
        if bits.len() != family.m() {
            return Err(Error::FamilyMismatch);
        }
        Ok(BloomFilter { bits, family })
    }

    pub fn add(&mut self, element: u64) {
        for pos in self.family.positions(element) {
            self.bits.set(pos);
        }
    }

    pub fn query(&self, element: u64) -> bool {
        self.family.positions(element).iter().all(|&pos| self.bits.get(pos))
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn family(&self) -> &Arc<HashFamily> {
        &self.family
    }
}
