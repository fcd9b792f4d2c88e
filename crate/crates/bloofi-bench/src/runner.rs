use std::sync::Arc;
use std::time::Instant;

use bloofi::{BloofiTree, BloomFilter, Error, FlatBloofi, HashFamily, NaiveIndex, Result};
use rand::seq::index::sample;
use rand::Rng;

use crate::config::{Construction, ExperimentConfig, IndexKind};
use crate::population::{
    build_blind_queries, build_queries, generate_population, halve_population, maintenance_rng,
    Population,
};

/// Per-operation measurements for one index under one configuration.
///
/// bf-costs count index nodes whose filter value or links were touched,
/// the hardware-independent cost measure. Searches over the flat and naive
/// structures check every stored filter, so their search bf-cost is
/// reported as the filter count; their maintenance ops touch a single
/// entry and are reported as 1. Times are milliseconds per operation;
/// search times average the last 5 of 10 repetitions of the query
/// workload, the earlier runs serving as warmup.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRecord {
    pub search_bf_cost: f64,
    pub search_time_ms: f64,
    pub storage_bytes: u64,
    pub insert_bf_cost: f64,
    pub insert_time_ms: f64,
    pub delete_bf_cost: f64,
    pub delete_time_ms: f64,
    pub update_bf_cost: f64,
    pub update_time_ms: f64,
    pub matches_per_query: f64,
}

/// One output row: a configuration, the index it ran on, and what was
/// measured.
#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub config: ExperimentConfig,
    pub index: IndexKind,
    pub metrics: MetricsRecord,
}

const SEARCH_REPS: usize = 10;
const SEARCH_TIMED_REPS: usize = 5;
/// Maintenance ops are averaged over at most this many sampled filters.
const MAINTENANCE_SAMPLE: usize = 200;

enum AnyIndex {
    Tree(BloofiTree),
    Flat(FlatBloofi),
    Naive(NaiveIndex),
}

struct BuildStats {
    insert_bf_cost: f64,
    insert_time_ms: f64,
}

impl AnyIndex {
    fn build(
        kind: IndexKind,
        config: &ExperimentConfig,
        family: &Arc<HashFamily>,
        filters: &[(u64, BloomFilter)],
    ) -> Result<(Self, BuildStats)> {
        match kind {
            IndexKind::Bloofi => {
                if config.construction == Construction::Bulk {
                    let start = Instant::now();
                    let tree = BloofiTree::bulk_build(
                        family.clone(),
                        config.order,
                        config.metric,
                        config.heuristic,
                        filters,
                    )?;
                    let elapsed = ms(start);
                    let stats = BuildStats {
                        insert_bf_cost: tree.access_cost() as f64 / filters.len() as f64,
                        insert_time_ms: elapsed / filters.len() as f64,
                    };
                    tree.reset_access_cost();
                    Ok((AnyIndex::Tree(tree), stats))
                } else {
                    let mut tree = BloofiTree::new(
                        family.clone(),
                        config.order,
                        config.metric,
                        config.heuristic,
                    )?;
                    let mut cost = 0u64;
                    let start = Instant::now();
                    for (id, f) in filters {
                        tree.insert(*id, f)?;
                    }
                    cost += tree.access_cost();
                    let elapsed = ms(start);
                    tree.reset_access_cost();
                    let stats = BuildStats {
                        insert_bf_cost: cost as f64 / filters.len() as f64,
                        insert_time_ms: elapsed / filters.len() as f64,
                    };
                    Ok((AnyIndex::Tree(tree), stats))
                }
            }
            IndexKind::Flat => {
                let mut flat = FlatBloofi::new(family.clone());
                let start = Instant::now();
                for (id, f) in filters {
                    flat.insert(*id, f)?;
                }
                let elapsed = ms(start);
                let stats = BuildStats {
                    insert_bf_cost: 1.0,
                    insert_time_ms: elapsed / filters.len() as f64,
                };
                Ok((AnyIndex::Flat(flat), stats))
            }
            IndexKind::Naive => {
                let mut naive = NaiveIndex::new(family.clone());
                let start = Instant::now();
                for (id, f) in filters {
                    naive.insert(*id, f)?;
                }
                let elapsed = ms(start);
                let stats = BuildStats {
                    insert_bf_cost: 1.0,
                    insert_time_ms: elapsed / filters.len() as f64,
                };
                Ok((AnyIndex::Naive(naive), stats))
            }
        }
    }

    fn find_matches(&self, q: u64) -> Vec<u64> {
        match self {
            AnyIndex::Tree(t) => t.find_matches(q),
            AnyIndex::Flat(f) => f.find_matches(q),
            AnyIndex::Naive(n) => n.find_matches(q),
        }
    }

    fn len(&self) -> usize {
        match self {
            AnyIndex::Tree(t) => t.leaf_count(),
            AnyIndex::Flat(f) => f.len(),
            AnyIndex::Naive(n) => n.len(),
        }
    }

    fn storage_bytes(&self, m: usize) -> u64 {
        let filter_bytes = (m.div_ceil(64) * 8) as u64;
        match self {
            // One filter value per node, leaves included.
            AnyIndex::Tree(t) => filter_bytes * t.node_count() as u64,
            // Word-sliced storage rounds the population up to whole arrays.
            AnyIndex::Flat(f) => filter_bytes * f.capacity() as u64,
            AnyIndex::Naive(n) => filter_bytes * n.len() as u64,
        }
    }

    /// Runs the query workload `SEARCH_REPS` times. The first pass collects
    /// bf-costs and match counts (both deterministic); the wall-clock
    /// average keeps only the last `SEARCH_TIMED_REPS` passes.
    fn search_phase(&self, queries: &[u64]) -> (f64, f64, f64) {
        let mut matches_total = 0usize;
        let bf_cost = match self {
            AnyIndex::Tree(t) => {
                t.reset_access_cost();
                for &q in queries {
                    matches_total += t.find_matches(q).len();
                }
                t.access_cost() as f64 / queries.len() as f64
            }
            _ => {
                for &q in queries {
                    matches_total += self.find_matches(q).len();
                }
                self.len() as f64
            }
        };
        let mut timed = 0.0;
        for rep in 1..SEARCH_REPS {
            let start = Instant::now();
            for &q in queries {
                std::hint::black_box(self.find_matches(q));
            }
            let elapsed = ms(start);
            if rep >= SEARCH_REPS - SEARCH_TIMED_REPS {
                timed += elapsed;
            }
        }
        let per_query = timed / (SEARCH_TIMED_REPS * queries.len()) as f64;
        (bf_cost, per_query, matches_total as f64 / queries.len() as f64)
    }

    /// Applies the given OR-updates, returning mean (bf-cost, ms) per op.
    fn measure_updates(&mut self, updates: &[(u64, BloomFilter)]) -> Result<(f64, f64)> {
        let mut cost = 0u64;
        let start = Instant::now();
        for (id, f) in updates {
            match self {
                AnyIndex::Tree(t) => {
                    t.reset_access_cost();
                    t.update(*id, f)?;
                    cost += t.access_cost();
                }
                AnyIndex::Flat(fl) => {
                    fl.update(*id, f)?;
                    cost += 1;
                }
                AnyIndex::Naive(n) => {
                    n.update(*id, f)?;
                    cost += 1;
                }
            }
        }
        let elapsed = ms(start);
        Ok((cost as f64 / updates.len() as f64, elapsed / updates.len() as f64))
    }

    fn measure_deletes(&mut self, ids: &[u64]) -> Result<(f64, f64)> {
        let mut cost = 0u64;
        let start = Instant::now();
        for &id in ids {
            match self {
                AnyIndex::Tree(t) => {
                    t.reset_access_cost();
                    t.delete(id)?;
                    cost += t.access_cost();
                }
                AnyIndex::Flat(f) => {
                    f.delete(id)?;
                    cost += 1;
                }
                AnyIndex::Naive(n) => {
                    n.delete(id)?;
                    cost += 1;
                }
            }
        }
        let elapsed = ms(start);
        Ok((cost as f64 / ids.len() as f64, elapsed / ids.len() as f64))
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Supersets of a sample of the stored filters (each with a few extra
/// elements ORed in) plus a disjoint sample of ids to delete, both drawn
/// from the maintenance RNG stream.
fn maintenance_plan(
    config: &ExperimentConfig,
    family: &Arc<HashFamily>,
    filters: &[(u64, BloomFilter)],
) -> (Vec<(u64, BloomFilter)>, Vec<u64>) {
    let mut rng = maintenance_rng(config.seed);
    let count = filters.len().min(MAINTENANCE_SAMPLE);
    let update_sample = sample(&mut rng, filters.len(), count);
    let mut updates = Vec::with_capacity(count);
    for slot in update_sample {
        let (id, filter) = &filters[slot];
        let mut bits = filter.bits().clone();
        let mut extra = BloomFilter::new(family.clone());
        for _ in 0..3 {
            extra.add(rng.gen());
        }
        bits.union_with(extra.bits());
        updates.push((*id, BloomFilter::from_bits(family.clone(), bits).expect("same family")));
    }
    let delete_sample = sample(&mut rng, filters.len(), count);
    let deletes = delete_sample.into_iter().map(|slot| filters[slot].0).collect();
    (updates, deletes)
}

/// Runs the configured experiment: generates the population, builds each
/// selected index, runs the query workload, then measures sampled updates
/// and deletes. Configuration errors surface before anything is timed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let population = generate_population(config)?;
    let queries = build_queries(config, &population);
    run_phases(config, &population, &queries, false)
}

/// The after-updates variant: each index is built from filters holding
/// only the first half of their elements, then brought up to date with
/// in-place OR-updates of the full filters; search metrics describe the
/// post-update structure, and the update columns cover the full-population
/// update pass itself.
pub fn run_update_phase(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let population = generate_population(config)?;
    let queries = build_queries(config, &population);
    run_phases(config, &population, &queries, true)
}

/// Measures a collection loaded from disk. The underlying element sets are
/// unknown, so queries are uniformly random probes.
pub fn run_loaded(
    config: &ExperimentConfig,
    family: &Arc<HashFamily>,
    filters: &[(u64, BloomFilter)],
) -> Result<Vec<ExperimentRow>> {
    if filters.is_empty() {
        return Err(Error::InvalidParameter("loaded collection is empty".into()));
    }
    let queries = build_blind_queries(config);
    let mut rows = Vec::new();
    for kind in config.index.kinds() {
        let metrics = measure_kind(kind, config, family, filters, None, &queries)?;
        let mut config = config.clone();
        config.num_filters = filters.len();
        rows.push(ExperimentRow { config, index: kind, metrics });
    }
    Ok(rows)
}

fn run_phases(
    config: &ExperimentConfig,
    population: &Population,
    queries: &[u64],
    after_updates: bool,
) -> Result<Vec<ExperimentRow>> {
    let halves = after_updates.then(|| halve_population(population));
    let mut rows = Vec::new();
    for kind in config.index.kinds() {
        let metrics = match &halves {
            Some(halves) => measure_kind(
                kind,
                config,
                &population.family,
                &halves.filters,
                Some(&population.filters),
                queries,
            )?,
            None => {
                measure_kind(kind, config, &population.family, &population.filters, None, queries)?
            }
        };
        rows.push(ExperimentRow { config: config.clone(), index: kind, metrics });
    }
    Ok(rows)
}

/// Builds one index from `filters` and measures it. When `full_filters` is
/// given (the after-updates phase), every stored filter is OR-updated to
/// its full value before the search phase, and those updates provide the
/// update metrics; otherwise updates are measured on a sample afterwards.
fn measure_kind(
    kind: IndexKind,
    config: &ExperimentConfig,
    family: &Arc<HashFamily>,
    filters: &[(u64, BloomFilter)],
    full_filters: Option<&[(u64, BloomFilter)]>,
    queries: &[u64],
) -> Result<MetricsRecord> {
    let (mut index, build) = AnyIndex::build(kind, config, family, filters)?;
    let storage_bytes = index.storage_bytes(family.m());

    // The after-updates phase searches the post-update structure; the
    // plain phase searches first so sampled updates cannot perturb it.
    let ((update_bf, update_ms), (search_bf_cost, search_time_ms, matches_per_query)) =
        match full_filters {
            Some(full) => {
                let u = index.measure_updates(full)?;
                (u, index.search_phase(queries))
            }
            None => {
                let s = index.search_phase(queries);
                let (updates, _) = maintenance_plan(config, family, filters);
                (index.measure_updates(&updates)?, s)
            }
        };

    let (_, deletes) = maintenance_plan(config, family, filters);
    let (delete_bf, delete_ms) = index.measure_deletes(&deletes)?;

    Ok(MetricsRecord {
        search_bf_cost,
        search_time_ms,
        storage_bytes,
        insert_bf_cost: build.insert_bf_cost,
        insert_time_ms: build.insert_time_ms,
        delete_bf_cost: delete_bf,
        delete_time_ms: delete_ms,
        update_bf_cost: update_bf,
        update_time_ms: update_ms,
        matches_per_query,
    })
}
