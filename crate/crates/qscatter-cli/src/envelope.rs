//! Machine-readable result envelope.
//!
//! The `inputs` map echoes every resolved input under its config-file key,
//! so feeding those lines back through --config reproduces the run exactly.
//! `rows` holds numeric cells (null = skipped) and `flags` the matching
//! skip codes, both including the leading x column.

use crate::csvio::write_atomic;
use crate::CliError;
use qscatter::experiments::{Cell, SweepTable};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

pub const ENVELOPE_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct ResultEnvelope {
    pub version: u32,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub flags: Vec<Vec<String>>,
    pub timing_s: f64,
}

impl ResultEnvelope {
    pub fn new(command: &str, inputs: BTreeMap<String, String>) -> Self {
        Self {
            version: ENVELOPE_VERSION,
            command: command.to_string(),
            inputs,
            columns: Vec::new(),
            rows: Vec::new(),
            flags: Vec::new(),
            timing_s: 0.0,
        }
    }

    /// Single-row envelope for the point commands.
    pub fn push_row(&mut self, cells: &[(&str, Option<f64>, &str)]) {
        if self.columns.is_empty() {
            self.columns = cells.iter().map(|(n, _, _)| n.to_string()).collect();
        }
        self.rows.push(cells.iter().map(|(_, v, _)| *v).collect());
        self.flags
            .push(cells.iter().map(|(_, _, f)| f.to_string()).collect());
    }

    pub fn from_table(
        command: &str,
        inputs: BTreeMap<String, String>,
        t: &SweepTable,
        timing_s: f64,
    ) -> Self {
        let mut columns = vec![t.x_name.clone()];
        columns.extend(t.columns.iter().cloned());
        let rows = t
            .rows
            .iter()
            .map(|r| {
                std::iter::once(Some(r.x))
                    .chain(r.cells.iter().map(Cell::value))
                    .collect()
            })
            .collect();
        let flags = t
            .rows
            .iter()
            .map(|r| {
                std::iter::once(String::new())
                    .chain(r.cells.iter().map(|c| match c {
                        Cell::Value(_) => String::new(),
                        Cell::Skipped(code) => (*code).to_string(),
                    }))
                    .collect()
            })
            .collect();
        Self {
            version: ENVELOPE_VERSION,
            command: command.to_string(),
            inputs,
            columns,
            rows,
            flags,
            timing_s,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Io(format!("cannot serialize envelope: {e}")))?;
        write_atomic(path, &body)
    }
}
