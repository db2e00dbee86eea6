//! CSV serialization for sweep tables and the reader used by `plot`.
//!
//! Values are written with 17 significant digits so parsing the file back
//! reproduces every f64 bit for bit. A skipped cell is an empty field; its
//! reason lands in the matching `<column>_flag` field.

use crate::CliError;
use qscatter::experiments::{Cell, SweepTable};
use std::io::Write;
use std::path::Path;

pub fn fmt_val(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn table_to_csv(t: &SweepTable) -> String {
    let mut s = String::new();
    s.push_str(&t.x_name);
    for c in &t.columns {
        s.push(',');
        s.push_str(c);
    }
    for c in &t.columns {
        s.push(',');
        s.push_str(c);
        s.push_str("_flag");
    }
    s.push('\n');
    for row in &t.rows {
        s.push_str(&fmt_val(row.x));
        for cell in &row.cells {
            s.push(',');
            if let Cell::Value(v) = cell {
                s.push_str(&fmt_val(*v));
            }
        }
        for cell in &row.cells {
            s.push(',');
            if let Cell::Skipped(code) = cell {
                s.push_str(code);
            }
        }
        s.push('\n');
    }
    s
}

/// A parsed sweep CSV: x plus the value columns (`*_flag` columns dropped).
#[derive(Debug)]
pub struct PlotData {
    pub x_name: String,
    pub columns: Vec<String>,
    pub rows: Vec<(f64, Vec<Option<f64>>)>,
}

pub fn parse_csv(text: &str) -> Result<PlotData, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty CSV")?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 2 {
        return Err("need an x column and at least one value column".into());
    }
    let x_name = fields[0].to_string();
    let mut value_idx = Vec::new();
    let mut columns = Vec::new();
    for (i, f) in fields.iter().enumerate().skip(1) {
        if !f.ends_with("_flag") {
            value_idx.push(i);
            columns.push(f.to_string());
        }
    }
    if columns.is_empty() {
        return Err("no value columns in header".into());
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != fields.len() {
            return Err(format!(
                "row {}: {} fields, header has {}",
                ln + 2,
                cells.len(),
                fields.len()
            ));
        }
        let x: f64 = cells[0]
            .trim()
            .parse()
            .map_err(|_| format!("row {}: bad x value '{}'", ln + 2, cells[0]))?;
        let values = value_idx
            .iter()
            .map(|&i| {
                let c = cells[i].trim();
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>()
                        .map(Some)
                        .map_err(|_| format!("row {}: bad value '{c}'", ln + 2))
                }
            })
            .collect::<Result<Vec<_>, String>>()?;
        rows.push((x, values));
    }
    if rows.is_empty() {
        return Err("CSV has no data rows".into());
    }
    Ok(PlotData { x_name, columns, rows })
}

/// Write-then-rename so readers never observe a half-written file.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let io_err = |e: &dyn std::fmt::Display| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(&e))?;
    tmp.write_all(content.as_bytes()).map_err(|e| io_err(&e))?;
    tmp.persist(path).map_err(|e| io_err(&e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip_bit_exact() {
        for v in [0.6, 1.0 / 3.0, 2.0f64.sqrt(), 6.24e-4, 1e-300, -0.0] {
            let back: f64 = fmt_val(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v}");
        }
    }

    #[test]
    fn csv_round_trip() {
        use qscatter::experiments::SweepRow;
        let table = SweepTable {
            x_name: "x".into(),
            columns: vec!["a".into(), "b".into()],
            rows: vec![
                SweepRow { x: 0.1, cells: vec![Cell::Value(0.25), Cell::Skipped("undefined")] },
                SweepRow { x: 0.2, cells: vec![Cell::Value(1.0 / 7.0), Cell::Value(0.5)] },
            ],
        };
        let csv = table_to_csv(&table);
        let parsed = parse_csv(&csv).unwrap();
        assert_eq!(parsed.x_name, "x");
        assert_eq!(parsed.columns, vec!["a", "b"]);
        assert_eq!(parsed.rows.len(), 2);
        assert_eq!(parsed.rows[0].1[0].unwrap().to_bits(), 0.25f64.to_bits());
        assert_eq!(parsed.rows[0].1[1], None);
        assert_eq!(parsed.rows[1].1[0].unwrap().to_bits(), (1.0f64 / 7.0).to_bits());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("x\n1\n").is_err());
        assert!(parse_csv("x,a\n1,2,3\n").is_err());
        assert!(parse_csv("x,a\nfoo,2\n").is_err());
        assert!(parse_csv("x,a\n").is_err());
    }
}
