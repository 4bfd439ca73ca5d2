//! UTF-8 tab-delimited tables with a one-line header.

use std::fs;
use std::path::Path;

use crate::error::{GpfError, Result};
use crate::io::write_atomic;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest representation that parses back to the same f64.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Append a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| num(x)).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// A column parsed as numbers; unparseable cells become NaN.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn to_text(&self) -> String {
        let mut s = self.header.join("\t");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join("\t"));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or("empty table")?
            .split('\t')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, l) in lines.enumerate() {
            let row: Vec<String> = l.split('\t').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(format!("row {} has {} cells, header has {}", i + 1, row.len(), header.len()));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| GpfError::io(path, e))?;
        Table::parse(&text).map_err(|reason| GpfError::Snapshot {
            path: path.to_path_buf(),
            reason,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut t = Table::new(&["k", "power"]);
        t.push_nums(&[0.1, 1.0 / 3.0]);
        t.push(vec!["inf".into(), "NaN".into()]);
        let back = Table::parse(&t.to_text()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column_f64("power").unwrap()[0], 1.0 / 3.0);
        assert!(back.column_f64("k").unwrap()[1].is_infinite());
    }

    #[test]
    fn header_only_table_is_valid() {
        let t = Table::new(&["f_hz", "k_peak"]);
        assert_eq!(t.to_text(), "f_hz\tk_peak\n");
        assert!(Table::parse("f_hz\tk_peak\n").unwrap().is_empty());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(Table::parse("a\tb\n1\n").is_err());
    }
}
