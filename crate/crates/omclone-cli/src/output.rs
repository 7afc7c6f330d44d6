//! Result tables: a CSV file with the numeric data and a JSON sidecar that
//! self-describes the run (effective config, seed, version, wall time, and
//! per-command extras such as contours or pulse schedules).
//!
//! The CSV bytes are a pure function of `(config, seed)`; everything
//! non-deterministic (wall time) lives in the sidecar.

use crate::config::RunConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Frequency unit of every dimensionless quantity, recorded as metadata.
pub const MECHANICAL_FREQUENCY_HZ: f64 = 2e6;

/// In-memory numeric table with a failure log.
pub struct ResultTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub failures: Vec<FailureEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureEntry {
    pub cell: String,
    pub error: String,
}

impl ResultTable {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn fail(&mut self, cell: String, error: String) {
        self.failures.push(FailureEntry { cell, error });
    }

    fn csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            let record: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Some(x) => format!("{x}"),
                    None => String::new(),
                })
                .collect();
            w.write_record(&record).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// First twelve hex digits of the SHA-256 of the effective config (seed and
/// tolerances included); used to name the output file pair.
pub fn config_hash(config: &RunConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    artifact_version: &'a str,
    mechanical_frequency_hz: f64,
    seed: u64,
    threads: Option<usize>,
    wall_time_s: f64,
    config: &'a RunConfig,
    columns: &'a [&'static str],
    rows: usize,
    failures: &'a [FailureEntry],
    extras: serde_json::Value,
}

pub struct WrittenPair {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// Write the `<command>-<hash>.csv` / `.json` pair into `out_dir`.
#[allow(clippy::too_many_arguments)]
pub fn write_pair(
    out_dir: &Path,
    command: &str,
    config: &RunConfig,
    threads: Option<usize>,
    table: &ResultTable,
    extras: serde_json::Value,
    wall_time_s: f64,
) -> std::io::Result<WrittenPair> {
    fs::create_dir_all(out_dir)?;
    let stem = format!("{command}-{}", config_hash(config));
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let json_path = out_dir.join(format!("{stem}.json"));

    fs::write(&csv_path, table.csv_bytes())?;

    let sidecar = Sidecar {
        command,
        artifact_version: env!("CARGO_PKG_VERSION"),
        mechanical_frequency_hz: MECHANICAL_FREQUENCY_HZ,
        seed: config.seed,
        threads,
        wall_time_s,
        config,
        columns: &table.columns,
        rows: table.rows.len(),
        failures: &table.failures,
        extras,
    };
    let mut f = fs::File::create(&json_path)?;
    serde_json::to_writer_pretty(&mut f, &sidecar)?;
    f.write_all(b"\n")?;
    Ok(WrittenPair {
        csv_path,
        json_path,
    })
}
