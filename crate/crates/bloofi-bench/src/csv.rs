use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::runner::ExperimentRow;

/// Column order is fixed: every configuration field, then every metric
/// field, one row per (configuration, index) pair.
pub const HEADER: &str = "index,num_filters,order,expected_elements,elements_per_filter,\
rho_false,construction,metric,distribution,heuristic,queries,seed,\
search_bf_cost,search_time_ms,storage_bytes,insert_bf_cost,insert_time_ms,\
delete_bf_cost,delete_time_ms,update_bf_cost,update_time_ms,matches_per_query";

pub fn emit_csv<W: Write>(rows: &[ExperimentRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for row in rows {
        let c = &row.config;
        let m = &row.metrics;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{},{},{:.6},{},{:.6},{},{:.6},{}",
            row.index,
            c.num_filters,
            c.order,
            c.expected_elements,
            c.elements_per_filter,
            c.rho_false,
            c.construction,
            c.metric,
            c.distribution,
            if c.heuristic { "on" } else { "off" },
            c.queries,
            c.seed,
            m.search_bf_cost,
            m.search_time_ms,
            m.storage_bytes,
            m.insert_bf_cost,
            m.insert_time_ms,
            m.delete_bf_cost,
            m.delete_time_ms,
            m.update_bf_cost,
            m.update_time_ms,
            m.matches_per_query,
        )?;
    }
    Ok(())
}

pub fn write_csv(rows: &[ExperimentRow], path: impl AsRef<Path>) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    emit_csv(rows, &mut out)?;
    out.flush()
}
