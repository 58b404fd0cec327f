//! One row of experiment output and its CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::Convergence;

/// CSV header, in column order.
pub const COLUMNS: [&str; 15] = [
    "alpha_index",
    "sigma_index",
    "epsilon_index",
    "replication",
    "alpha",
    "sigma",
    "epsilon",
    "seed",
    "reward_gap",
    "convergence_time",
    "policy_variance",
    "pareto_inefficiency",
    "measured_alignment",
    "theoretical_friction",
    "error",
];

/// Metrics of a single run. Metric cells are empty when the run failed, in
/// which case `error` holds the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub alpha_index: usize,
    pub sigma_index: usize,
    pub epsilon_index: usize,
    pub replication: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub reward_gap: Option<f64>,
    pub convergence_time: Option<Convergence>,
    pub policy_variance: Option<f64>,
    pub pareto_inefficiency: Option<f64>,
    pub measured_alignment: Option<f64>,
    pub theoretical_friction: f64,
    pub error: Option<String>,
}

impl MetricsRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

pub fn write_csv<W: Write>(records: &[MetricsRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[MetricsRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv writer emits utf-8"))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<MetricsRecord>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(crate::error::MarlError::Config(format!(
            "unexpected metrics header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize().map(|r| r.map_err(Into::into)).collect()
}

pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Vec<MetricsRecord>> {
    read_csv(std::fs::File::open(path)?)
}
