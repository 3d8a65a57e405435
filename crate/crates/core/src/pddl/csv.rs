use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::PddlError;

pub const CSV_HEADER: &str = "domain,num_cases,completeness,delta,problem_id,solved,plan_length,cpu_millis";

/// One solve attempt in an experiment sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub domain: String,
    pub num_cases: usize,
    pub completeness: f64,
    pub delta: usize,
    pub problem_id: String,
    pub solved: bool,
    pub plan_length: usize,
    pub cpu_millis: f64,
}

/// Writes a header row followed by `rows` in the given order.
pub fn write_rows<W: Write>(out: W, rows: &[ExperimentRow]) -> Result<(), PddlError> {
    let mut w = ::csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| PddlError::Csv(e.into()))?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ExperimentRow>, PddlError> {
    let mut r = ::csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(PddlError::Csv(::csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header `{}`", header.join(",")),
        ))));
    }
    r.deserialize().map(|row| row.map_err(PddlError::from)).collect()
}
