use std::sync::Arc;

use bloofi::{BloomFilter, FilterParams, HashFamily, Result};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Distribution, ExperimentConfig};

/// RNG streams carved out of the experiment seed, so population, queries,
/// and maintenance sampling are independent and individually reproducible.
const STREAM_POPULATION: u64 = 1;
const STREAM_QUERIES: u64 = 2;
const STREAM_MAINTENANCE: u64 = 3;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn maintenance_rng(seed: u64) -> ChaCha8Rng {
    rng_for(seed, STREAM_MAINTENANCE)
}

/// A generated filter population: the shared family, the filters, and the
/// elements each one holds (kept so queries can sample present elements
/// and the update phase can rebuild supersets).
pub struct Population {
    pub params: FilterParams,
    pub family: Arc<HashFamily>,
    pub filters: Vec<(u64, BloomFilter)>,
    pub elements: Vec<Vec<u64>>,
    /// Exclusive upper bound on every stored element; probes at or above
    /// it are guaranteed absent from the underlying sets.
    pub absent_floor: u64,
}

/// Draws the population for `config`: `nonrandom` assigns filter `i` the
/// consecutive integers `[i*n, (i+1)*n)`, `random` draws `n` distinct
/// integers from a width-`2n` window placed uniformly in `[0, N*n)`.
pub fn generate_population(config: &ExperimentConfig) -> Result<Population> {
    let params = config.params()?;
    let family = Arc::new(HashFamily::generate(params.k, params.m, config.seed)?);
    let n = config.elements_per_filter;
    let total = config.num_filters as u64 * n;
    let mut rng = rng_for(config.seed, STREAM_POPULATION);

    let mut filters = Vec::with_capacity(config.num_filters);
    let mut elements = Vec::with_capacity(config.num_filters);
    for i in 0..config.num_filters as u64 {
        let members: Vec<u64> = match config.distribution {
            Distribution::Nonrandom => (i * n..(i + 1) * n).collect(),
            Distribution::Random => {
                let start = rng.gen_range(0..total);
                sample(&mut rng, 2 * n as usize, n as usize)
                    .into_iter()
                    .map(|offset| start + offset as u64)
                    .collect()
            }
        };
        let mut filter = BloomFilter::new(family.clone());
        for &e in &members {
            filter.add(e);
        }
        filters.push((i, filter));
        elements.push(members);
    }
    let absent_floor = match config.distribution {
        Distribution::Nonrandom => total,
        Distribution::Random => total + 2 * n,
    };
    Ok(Population { params, family, filters, elements, absent_floor })
}

/// Builds the query workload: half the probes are elements known to be
/// present in some filter, half are guaranteed absent, interleaved by a
/// seeded coin so reruns are identical.
pub fn build_queries(config: &ExperimentConfig, population: &Population) -> Vec<u64> {
    let mut rng = rng_for(config.seed, STREAM_QUERIES);
    let mut queries = Vec::with_capacity(config.queries);
    for _ in 0..config.queries {
        let absent = population.elements.is_empty() || rng.gen_bool(0.5);
        if absent {
            queries.push(population.absent_floor + rng.gen_range(0..1u64 << 32));
        } else {
            let members = &population.elements[rng.gen_range(0..population.elements.len())];
            queries.push(members[rng.gen_range(0..members.len())]);
        }
    }
    queries
}

/// Query workload for a collection loaded from disk, where the underlying
/// element sets are unknown: uniformly random probes.
pub fn build_blind_queries(config: &ExperimentConfig) -> Vec<u64> {
    let mut rng = rng_for(config.seed, STREAM_QUERIES);
    (0..config.queries).map(|_| rng.gen()).collect()
}

/// The same population with each filter rebuilt from only the first half
/// of its elements, for measuring in-place updates: indexes are built from
/// the halves and then updated with the full filters.
pub fn halve_population(population: &Population) -> Population {
    let family = population.family.clone();
    let mut filters = Vec::with_capacity(population.filters.len());
    let mut elements = Vec::with_capacity(population.elements.len());
    for ((id, _), members) in population.filters.iter().zip(&population.elements) {
        let half = &members[..members.len() / 2];
        let mut filter = BloomFilter::new(family.clone());
        for &e in half {
            filter.add(e);
        }
        filters.push((*id, filter));
        elements.push(half.to_vec());
    }
    Population {
        params: population.params,
        family,
        filters,
        elements,
        absent_floor: population.absent_floor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonrandom_population_uses_consecutive_disjoint_ranges() {
        let config = ExperimentConfig {
            num_filters: 2,
            elements_per_filter: 3,
            expected_elements: 100,
            queries: 10,
            ..Default::default()
        };
        let p = generate_population(&config).unwrap();
        assert_eq!(p.elements[0], vec![0, 1, 2]);
        assert_eq!(p.elements[1], vec![3, 4, 5]);
        assert!(p.filters[0].1.query(2));
        assert!(p.filters[1].1.query(4));
    }

    #[test]
    fn nonrandom_ranges_are_pairwise_disjoint() {
        let config = ExperimentConfig {
            num_filters: 20,
            elements_per_filter: 7,
            expected_elements: 500,
            queries: 10,
            ..Default::default()
        };
        let p = generate_population(&config).unwrap();
        let mut seen = std::collections::HashSet::new();
        for members in &p.elements {
            for &e in members {
                assert!(seen.insert(e), "element {e} appears in two filters");
            }
        }
    }

    #[test]
    fn random_population_is_reproducible_and_bounded() {
        let config = ExperimentConfig {
            num_filters: 30,
            elements_per_filter: 10,
            expected_elements: 500,
            distribution: Distribution::Random,
            queries: 10,
            seed: 77,
            ..Default::default()
        };
        let a = generate_population(&config).unwrap();
        let b = generate_population(&config).unwrap();
        assert_eq!(a.elements, b.elements);
        for members in &a.elements {
            assert_eq!(members.len(), 10);
            let mut sorted = members.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 10, "elements must be distinct");
            assert!(members.iter().all(|&e| e < a.absent_floor));
        }
    }

    #[test]
    fn queries_mix_present_and_absent() {
        let config = ExperimentConfig {
            num_filters: 10,
            elements_per_filter: 10,
            expected_elements: 200,
            queries: 400,
            ..Default::default()
        };
        let p = generate_population(&config).unwrap();
        let queries = build_queries(&config, &p);
        assert_eq!(queries.len(), 400);
        let absent = queries.iter().filter(|&&q| q >= p.absent_floor).count();
        assert!((100..300).contains(&absent), "absent share badly off: {absent}/400");
        assert_eq!(queries, build_queries(&config, &p), "query workload must be seeded");
    }

    #[test]
    fn halved_population_keeps_prefixes() {
        let config = ExperimentConfig {
            num_filters: 4,
            elements_per_filter: 10,
            expected_elements: 100,
            queries: 10,
            ..Default::default()
        };
        let full = generate_population(&config).unwrap();
        let half = halve_population(&full);
        for (h, f) in half.elements.iter().zip(&full.elements) {
            assert_eq!(h.len(), 5);
            assert_eq!(h[..], f[..5]);
        }
        // Half filters are subsets: everything the half matches, the full
        // filter matches too.
        for ((_, hf), (_, ff)) in half.filters.iter().zip(&full.filters) {
            assert!(hf.bits().is_subset_of(ff.bits()));
        }
    }
}
