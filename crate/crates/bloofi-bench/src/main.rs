use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;

use bloofi::Metric;
use bloofi_bench::config::{Construction, Distribution, ExperimentConfig, IndexChoice};
use bloofi_bench::{csv, runner};

/// Query and maintenance benchmarks over three structures for the
/// multidimensional Bloom filter problem: a hierarchical filter tree, a
/// bit-sliced flat index, and a linear scan.
#[derive(Parser, Debug)]
#[command(name = "bloofi-bench", version, about)]
struct Cli {
    /// Number of filters to index (N).
    #[arg(long, default_value_t = 1000)]
    num_filters: usize,

    /// Tree order d: inner nodes hold between d and 2d children.
    #[arg(long, default_value_t = 2)]
    order: usize,

    /// Expected elements per filter used to size the bitmaps.
    #[arg(long, default_value_t = 10_000)]
    expected_elements: u64,

    /// Actual elements stored in each filter.
    #[arg(long, default_value_t = 100)]
    num_elements: u64,

    /// Target false-positive probability in (0, 1).
    #[arg(long, default_value_t = 0.01)]
    fpp: f64,

    /// Tree construction mode: iterative | bulk.
    #[arg(long, default_value = "iterative", value_parser = Construction::from_str)]
    construction: Construction,

    /// Similarity metric for tree placement: hamming | jaccard | cosine.
    #[arg(long, default_value = "hamming", value_parser = Metric::from_str)]
    metric: Metric,

    /// Element distribution: nonrandom (disjoint ranges) | random.
    #[arg(long, default_value = "nonrandom", value_parser = Distribution::from_str)]
    distribution: Distribution,

    /// Which index to measure: bloofi | flat | naive | all.
    #[arg(long, default_value = "all", value_parser = IndexChoice::from_str)]
    index: IndexChoice,

    /// No-split heuristic for saturated tree nodes: on | off.
    #[arg(long, default_value = "on", value_parser = parse_switch)]
    heuristic: bool,

    /// Number of search queries per measurement pass.
    #[arg(long, default_value_t = 5000)]
    queries: usize,

    /// Seed for every random choice (population, queries, sampling).
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Measure a filter collection file instead of generating a
    /// population; queries become uniformly random probes.
    #[arg(long)]
    load: Option<PathBuf>,

    /// Also run the after-updates phase: build from half of each filter's
    /// elements, OR-update to the full filters in place, then measure.
    #[arg(long)]
    with_update_phase: bool,
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        other => Err(format!("expected on or off, got {other:?}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("bloofi-bench: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig {
        num_filters: cli.num_filters,
        order: cli.order,
        expected_elements: cli.expected_elements,
        elements_per_filter: cli.num_elements,
        rho_false: cli.fpp,
        construction: cli.construction,
        metric: cli.metric,
        distribution: cli.distribution,
        index: cli.index,
        heuristic: cli.heuristic,
        queries: cli.queries,
        seed: cli.seed,
    };

    let mut rows = Vec::new();
    match &cli.load {
        Some(path) => {
            let (family, filters) = bloofi::io::read_collection(path)?;
            rows.extend(runner::run_loaded(&config, &family, &filters)?);
            if cli.with_update_phase {
                return Err("the update phase needs a generated population, not --load".into());
            }
        }
        None => {
            config.params()?;
            rows.extend(runner::run_experiment(&config)?);
            if cli.with_update_phase {
                rows.extend(runner::run_update_phase(&config)?);
            }
        }
    }

    match &cli.output {
        Some(path) => csv::write_csv(&rows, path)?,
        None => csv::emit_csv(&rows, &mut std::io::stdout().lock())?,
    }
    Ok(())
}
