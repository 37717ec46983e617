//! Experiment output rows, written as CSV with a JSON Lines mirror.

use std::cmp::Ordering;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One measured quantity at one parameter point.
///
/// Columns that do not apply to a row are empty in CSV and `null` in JSON.
/// `wall_clock_ms` is the only column that differs between reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema_version: u32,
    pub experiment: String,
    pub label: String,
    pub regime: String,
    pub quantity: String,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub block: Option<usize>,
    /// Index of a randomly drawn instance within a property sweep.
    pub instance: Option<usize>,
    pub epsilon: Option<f64>,
    pub dt: Option<f64>,
    pub t: Option<f64>,
    pub grid_cells: Option<usize>,
    pub replicas: Option<usize>,
    pub entropy: Option<f64>,
    pub fisher: Option<f64>,
    pub bound: Option<f64>,
    pub envelope: Option<f64>,
    pub distance_sq: Option<f64>,
    pub value: Option<f64>,
    pub reference: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub wall_clock_ms: f64,
}

impl ExperimentRecord {
    pub fn new(experiment: &str, label: &str, regime: &str, quantity: &str, seed: u64) -> Self {
        Self {
            schema_version: super::config::SCHEMA_VERSION,
            experiment: experiment.into(),
            label: label.into(),
            regime: regime.into(),
            quantity: quantity.into(),
            seed,
            n: None,
            k: None,
            block: None,
            instance: None,
            epsilon: None,
            dt: None,
            t: None,
            grid_cells: None,
            replicas: None,
            entropy: None,
            fisher: None,
            bound: None,
            envelope: None,
            distance_sq: None,
            value: None,
            reference: None,
            tolerance: None,
            passed: None,
            slope: None,
            intercept: None,
            r_squared: None,
            wall_clock_ms: 0.0,
        }
    }

    /// `H + I` when both are present, otherwise whichever is.
    pub fn total(&self) -> Option<f64> {
        match (self.entropy, self.fisher) {
            (Some(h), Some(i)) => Some(h + i),
            (h, i) => h.or(i),
        }
    }

    fn numerics(&self) -> [Option<f64>; 14] {
        [
            self.epsilon,
            self.dt,
            self.t,
            self.entropy,
            self.fisher,
            self.bound,
            self.envelope,
            self.distance_sq,
            self.value,
            self.reference,
            self.tolerance,
            self.slope,
            self.intercept,
            self.r_squared,
        ]
    }

    /// Fails on any NaN or infinite column.
    pub fn check_finite(&self) -> Result<()> {
        if self.numerics().iter().flatten().chain([&self.wall_clock_ms]).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("non-finite value in {} record", self.quantity)))
        }
    }

    /// Order used for writing: quantity, then the parameter tuple.
    pub fn parameter_cmp(&self, other: &Self) -> Ordering {
        let f = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (a, b) => a.is_some().cmp(&b.is_some()),
        };
        self.quantity
            .cmp(&other.quantity)
            .then(self.n.cmp(&other.n))
            .then(self.k.cmp(&other.k))
            .then(f(self.epsilon, other.epsilon))
            .then(f(self.dt, other.dt))
            .then(f(self.t, other.t))
            .then(self.grid_cells.cmp(&other.grid_cells))
            .then(self.block.cmp(&other.block))
            .then(self.instance.cmp(&other.instance))
    }
}

pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| a.parameter_cmp(b));
}

pub fn write_csv(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<prefix>.csv` and `<prefix>.jsonl`; returns both paths.
pub fn write_records(records: &[ExperimentRecord], prefix: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let prefix = prefix.as_ref();
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let csv_path = with_suffix(prefix, "csv");
    let json_path = with_suffix(prefix, "jsonl");
    write_csv(records, &csv_path)?;
    write_jsonl(records, &json_path)?;
    Ok((csv_path, json_path))
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Reads a `.csv` or `.jsonl` file written by `write_records`.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => {
            let mut r = csv::Reader::from_path(path)?;
            r.deserialize().map(|row| row.map_err(Error::from)).collect()
        }
        Some("jsonl") | Some("json") => {
            let reader = BufReader::new(std::fs::File::open(path)?);
            let mut out = Vec::new();
            for line in reader.lines() {
                let line = line?;
                if !line.trim().is_empty() {
                    out.push(serde_json::from_str(&line)?);
                }
            }
            Ok(out)
        }
        _ => Err(Error::InvalidArgument(format!("{} is neither .csv nor .jsonl", path.display()))),
    }
}
