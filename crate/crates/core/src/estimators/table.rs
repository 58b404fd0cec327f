//! Header-first CSV tables with named columns.
//!
//! Rows are numbered as they appear in the file, so the header is row 1 and
//! the first data row is row 2. Any malformed row aborts the read.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| csv_error(e, 1))?
            .iter()
            .map(|h| h.trim().to_owned())
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::Table {
                row: 1,
                message: "missing header".into(),
            });
        }
        for (i, name) in header.iter().enumerate() {
            if header[..i].contains(name) {
                return Err(Error::Table {
                    row: 1,
                    message: format!("duplicate column '{name}'"),
                });
            }
        }
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| csv_error(e, i + 2))?;
            rows.push(record.iter().map(str::to_owned).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Invalid(format!("cannot open {}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes())
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Table {
                row: 1,
                message: format!("no column named '{name}'"),
            })
    }

    pub fn column_str(&self, name: &str) -> Result<Vec<&str>> {
        let idx = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }

    /// Parse a column as finite floats.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r[idx].trim();
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Table {
                        row: i + 2,
                        message: format!("column '{name}': '{cell}' is not a finite number"),
                    }),
                }
            })
            .collect()
    }

    /// Several numeric columns, one vector per row.
    pub fn rows_f64(&self, names: &[&str]) -> Result<Vec<Vec<f64>>> {
        let cols = names
            .iter()
            .map(|n| self.column_f64(n))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.rows.len())
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect())
    }
}

fn csv_error(e: csv::Error, fallback_row: usize) -> Error {
    let row = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_row);
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_owned(),
        _ => e.to_string(),
    };
    Error::Table { row, message }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_columns() {
        let t = Table::parse_str("a,b\n1,2\n3.5,\"4\"\n").unwrap();
        assert_eq!(t.header(), &["a", "b"]);
        assert_eq!(t.column_f64("a").unwrap(), vec![1.0, 3.5]);
        assert_eq!(t.column_f64("b").unwrap(), vec![2.0, 4.0]);
        assert_eq!(t.rows_f64(&["b", "a"]).unwrap(), vec![vec![2.0, 1.0], vec![4.0, 3.5]]);
    }

    #[test]
    fn quoted_fields() {
        let t = Table::parse_str("name,v\n\"a, b\",1\n\"say \"\"hi\"\"\",2\n").unwrap();
        assert_eq!(t.column_str("name").unwrap(), vec!["a, b", "say \"hi\""]);
    }

    #[test]
    fn malformed_rows_report_row_numbers() {
        let err = Table::parse_str("a,b\n1,2\n3\n").unwrap_err();
        assert_eq!(
            err,
            Error::Table {
                row: 3,
                message: "expected 2 fields, found 1".into()
            }
        );
        let t = Table::parse_str("a,b\n1,2\nx,4\n").unwrap();
        assert!(matches!(t.column_f64("a"), Err(Error::Table { row: 3, .. })));
        assert!(matches!(t.column_f64("zzz"), Err(Error::Table { row: 1, .. })));
        assert!(Table::parse_str("a,a\n1,2\n").is_err());
        assert!(Table::parse_str("").is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let t = Table::parse_str("a\nNaN\n").unwrap();
        assert!(t.column_f64("a").is_err());
    }
}
