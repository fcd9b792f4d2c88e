use std::fmt;
use std::str::FromStr;

use bloofi::{derive_params, Error, FilterParams, Metric, Result};

/// How the tree index is constructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// Insert filters one by one, descending by similarity.
    Iterative,
    /// Greedy nearest-neighbor ordering followed by rightmost insertion.
    Bulk,
}

/// How filter contents are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distribution {
    /// Filter `i` holds exactly the integers `[i*n, (i+1)*n)`; element
    /// sets are pairwise disjoint.
    Nonrandom,
    /// Filter `i` holds `n` distinct integers drawn from a width-`2n`
    /// window starting at a uniformly random offset, so sets may overlap.
    Random,
}

/// Which index structures an experiment exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexChoice {
    Bloofi,
    Flat,
    Naive,
    All,
}

/// One structure actually measured; `IndexChoice::All` expands to the
/// three of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexKind {
    Bloofi,
    Flat,
    Naive,
}

impl IndexChoice {
    pub fn kinds(self) -> Vec<IndexKind> {
        match self {
            IndexChoice::Bloofi => vec![IndexKind::Bloofi],
            IndexChoice::Flat => vec![IndexKind::Flat],
            IndexChoice::Naive => vec![IndexKind::Naive],
            IndexChoice::All => vec![IndexKind::Bloofi, IndexKind::Flat, IndexKind::Naive],
        }
    }
}

/// Full parameter vector for one experiment. `Default` is the standard
/// grid point: 1000 filters sized for 10000 expected elements at 1% target
/// false positives (so 100992 bits, 7 hashes), 100 actual elements each,
/// order-2 tree built iteratively under the Hamming metric, disjoint
/// element ranges, heuristic on, 5000 queries, seed 42.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub num_filters: usize,
    pub order: usize,
    pub expected_elements: u64,
    pub elements_per_filter: u64,
    pub rho_false: f64,
    pub construction: Construction,
    pub metric: Metric,
    pub distribution: Distribution,
    pub index: IndexChoice,
    pub heuristic: bool,
    pub queries: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            num_filters: 1000,
            order: 2,
            expected_elements: 10_000,
            elements_per_filter: 100,
            rho_false: 0.01,
            construction: Construction::Iterative,
            metric: Metric::Hamming,
            distribution: Distribution::Nonrandom,
            index: IndexChoice::All,
            heuristic: true,
            queries: 5000,
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    /// Validates the configuration and derives the filter shape from it.
    pub fn params(&self) -> Result<FilterParams> {
        if self.num_filters == 0 {
            return Err(Error::InvalidParameter("need at least one filter".into()));
        }
        if self.elements_per_filter == 0 {
            return Err(Error::InvalidParameter("filters need at least one element".into()));
        }
        if self.queries == 0 {
            return Err(Error::InvalidParameter("need at least one query".into()));
        }
        if self.order < 2 {
            return Err(Error::InvalidParameter("tree order must be at least 2".into()));
        }
        derive_params(self.expected_elements, self.rho_false)
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Iterative => "iterative",
            Construction::Bulk => "bulk",
        })
    }
}

impl FromStr for Construction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iterative" => Ok(Construction::Iterative),
            "bulk" => Ok(Construction::Bulk),
            other => Err(Error::InvalidParameter(format!("unknown construction {other:?}"))),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Nonrandom => "nonrandom",
            Distribution::Random => "random",
        })
    }
}

impl FromStr for Distribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nonrandom" => Ok(Distribution::Nonrandom),
            "random" => Ok(Distribution::Random),
            other => Err(Error::InvalidParameter(format!("unknown distribution {other:?}"))),
        }
    }
}

impl fmt::Display for IndexChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexChoice::Bloofi => "bloofi",
            IndexChoice::Flat => "flat",
            IndexChoice::Naive => "naive",
            IndexChoice::All => "all",
        })
    }
}

impl FromStr for IndexChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bloofi" => Ok(IndexChoice::Bloofi),
            "flat" => Ok(IndexChoice::Flat),
            "naive" => Ok(IndexChoice::Naive),
            "all" => Ok(IndexChoice::All),
            other => Err(Error::InvalidParameter(format!("unknown index {other:?}"))),
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexKind::Bloofi => "bloofi",
            IndexKind::Flat => "flat",
            IndexKind::Naive => "naive",
        })
    }
}
