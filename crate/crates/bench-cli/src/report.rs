//! Benchmark rows and their CSV/JSON output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::{CliError, CliResult};

/// One benchmark configuration. Skipped configurations leave the timing fields empty.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub op: String,
    pub backend: String,
    pub n: usize,
    pub level: usize,
    pub batch: usize,
    pub threads: usize,
    pub reps: usize,
    /// Median wall time of one batched call.
    pub wall_ms_median: Option<f64>,
    /// `batch * 1000 / wall_ms_median`.
    pub ops_per_sec: Option<f64>,
}

pub const COLUMNS: [&str; 9] = [
    "op",
    "backend",
    "n",
    "level",
    "batch",
    "threads",
    "reps",
    "wall_ms_median",
    "ops_per_sec",
];

fn csv_err(e: csv::Error) -> CliError {
    CliError::Failed(e.to_string())
}

pub fn write_csv<W: Write>(rows: &[Row], w: W) -> CliResult<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(COLUMNS).map_err(csv_err)?;
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn emit(rows: &[Row], out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) if path.extension().is_some_and(|e| e == "json") => {
            let text = serde_json::to_string_pretty(rows).expect("rows serialize");
            std::fs::write(path, text)?;
        }
        Some(path) => write_csv(rows, std::fs::File::create(path)?)?,
        None => write_csv(rows, std::io::stdout().lock())?,
    }
    Ok(())
}
