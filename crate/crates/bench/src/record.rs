use std::io::{Read, Write};

use arclp::{Algorithm, SolveStatus};
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// One `(problem, algorithm)` run. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub problem: String,
    #[serde(with = "algorithm_name")]
    pub algorithm: Algorithm,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Final composite stopping metric; empty when presolve decided the problem.
    pub composite: Option<f64>,
    pub objective: Option<f64>,
    pub wall_time: f64,
    pub m_original: usize,
    pub n_original: usize,
    pub m_presolved: usize,
    pub n_presolved: usize,
    /// Hex fingerprint of the shared starting point.
    pub start_fingerprint: String,
}

impl BenchRecord {
    pub fn solved(&self) -> bool {
        self.status.is_optimal()
    }
}

mod algorithm_name {
    use arclp::Algorithm;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(a: &Algorithm, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(a.short_name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Algorithm, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub const CSV_COLUMNS: [&str; 12] = [
    "problem",
    "algorithm",
    "status",
    "iterations",
    "composite",
    "objective",
    "wall_time",
    "m_original",
    "n_original",
    "m_presolved",
    "n_presolved",
    "start_fingerprint",
];

pub fn write_records<W: Write>(w: W, records: &[BenchRecord]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    if records.is_empty() {
        out.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        out.serialize(r)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<BenchRecord>, BenchError> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|r| r.map_err(BenchError::from)).collect()
}
