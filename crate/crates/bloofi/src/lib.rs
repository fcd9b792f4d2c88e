//! Structures for the multidimensional Bloom filter problem: given one
//! element, find every indexed Bloom filter that may contain it.
//!
//! Three interchangeable indexes answer that all-membership query:
//!
//! - [`BloofiTree`], a balanced tree whose inner nodes hold the bitwise OR
//!   of their children, pruning whole subtrees per query;
//! - [`FlatBloofi`], a bit-sliced layout that tests 64 filters per AND
//!   instruction;
//! - [`NaiveIndex`], the linear scan, exact by construction and used as
//!   the ground truth in differential tests.
//!
//! All three require their filters to share one [`HashFamily`]; sizing
//! comes from [`derive_params`]. The [`io`] module gives collections a
//! bit-exact on-disk format.

pub mod bitvec;
pub mod error;
pub mod filter;
pub mod flat;
pub mod hash;
pub mod io;
pub mod metric;
pub mod naive;
pub mod tree;

pub use bitvec::{BitVector, WORD_BITS};
pub use error::{Error, Result};
pub use filter::{derive_params, expected_fpp, BloomFilter, FilterParams};
pub use flat::{FlatBloofi, SliceWord};
pub use hash::HashFamily;
pub use metric::Metric;
pub use naive::NaiveIndex;
pub use tree::BloofiTree;
