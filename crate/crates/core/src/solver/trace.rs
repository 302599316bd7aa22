use std::io::Write;

use crate::error::Result;

/// One checkpoint of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub epoch: f64,
    pub objective: f64,
    pub suboptimality: Option<f64>,
    pub feasibility: Option<f64>,
    pub duality_gap: Option<f64>,
    pub tau: f64,
    pub beta: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

pub const CSV_HEADER: &str = "k,epoch,F,subopt,feas,tau,beta,wall_ms";

fn scalar(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(scalar).unwrap_or_default()
}

impl Trace {
    pub fn push(&mut self, record: TraceRecord) {
        debug_assert!(self.records.last().is_none_or(|r| r.k < record.k));
        self.records.push(record);
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV with a header row; every scalar printed with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.k,
                scalar(r.epoch),
                scalar(r.objective),
                optional(r.suboptimality),
                optional(r.feasibility),
                scalar(r.tau),
                scalar(r.beta),
                scalar(r.wall_ms)
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
