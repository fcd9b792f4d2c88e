use std::fmt;
use std::str::FromStr;

use crate::bitvec::BitVector;
use crate::error::Error;

/// Distance between two equal-length bit vectors, used to decide where a
/// new filter lands in the tree index.
///
/// All three metrics return a nonnegative `f64` so one comparator serves
/// them all; Hamming is an integer embedded in the reals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    /// `popcount(a xor b)`.
    Hamming,
    /// `1 - |a and b| / |a or b|`.
    Jaccard,
    /// `1 - |a and b| / (sqrt(|a|) * sqrt(|b|))`.
    Cosine,
}

impl Metric {
    pub fn distance(self, a: &BitVector, b: &BitVector) -> f64 {
        match self {
            Metric::Hamming => a.xor_count_ones(b) as f64,
            Metric::Jaccard => {
                let union = a.or_count_ones(b);
                if union == 0 {
                    // Two all-zero vectors are identical.
                    return 0.0;
                }
                1.0 - a.and_count_ones(b) as f64 / union as f64
            }
            Metric::Cosine => {
                let (na, nb) = (a.count_ones(), b.count_ones());
                if na == 0 && nb == 0 {
                    return 0.0;
                }
                if na == 0 || nb == 0 {
                    // One side has no support: maximally dissimilar.
                    return 1.0;
                }
                // Clamped: sqrt rounding can push the similarity a hair
                // past one for identical vectors.
                (1.0 - a.and_count_ones(b) as f64 / ((na as f64).sqrt() * (nb as f64).sqrt()))
                    .max(0.0)
            }
        }
    }

    pub const ALL: [Metric; 3] = [Metric::Hamming, Metric::Jaccard, Metric::Cosine];
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Metric::Hamming => "hamming",
            Metric::Jaccard => "jaccard",
            Metric::Cosine => "cosine",
        };
        f.write_str(name)
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "hamming" => Ok(Metric::Hamming),
            "jaccard" => Ok(Metric::Jaccard),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}
