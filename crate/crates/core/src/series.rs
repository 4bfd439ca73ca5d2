//! Scalar observables sampled along a run.

use std::io::{BufRead, Write};

use crate::error::{GpfError, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub keys: Vec<String>,
    pub steps: Vec<u64>,
    pub times: Vec<f64>,
    /// One row per sample, ordered like `keys`.
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(keys: Vec<String>) -> Self {
        TimeSeries {
            keys,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, step: u64, time: f64, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.keys.len());
        self.steps.push(step);
        self.times.push(time);
        self.rows.push(row);
    }

    pub fn column(&self, key: &str) -> Option<Vec<f64>> {
        let j = self.keys.iter().position(|k| k == key)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Drop samples with step > `step`.
    pub fn truncate_after(&mut self, step: u64) {
        let keep = self.steps.iter().take_while(|&&s| s <= step).count();
        self.steps.truncate(keep);
        self.times.truncate(keep);
        self.rows.truncate(keep);
    }

    /// Tab-separated table with a `step time <keys…>` header. Values are
    /// written in shortest round-trip form.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "step\ttime")?;
        for k in &self.keys {
            write!(w, "\t{k}")?;
        }
        writeln!(w)?;
        for ((s, t), row) in self.steps.iter().zip(&self.times).zip(&self.rows) {
            write!(w, "{s}\t{t:?}")?;
            for v in row {
                write!(w, "\t{v:?}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let bad = |m: String| GpfError::Analysis(format!("malformed time series: {m}"));
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty".into()))?
            .map_err(|e| bad(e.to_string()))?;
        let cols: Vec<&str> = header.split('\t').collect();
        if cols.len() < 2 || cols[0] != "step" || cols[1] != "time" {
            return Err(bad(format!("header {header:?}")));
        }
        let mut out = TimeSeries::new(cols[2..].iter().map(|s| s.to_string()).collect());
        for line in lines {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != cols.len() {
                return Err(bad(format!("row has {} fields, header {}", f.len(), cols.len())));
            }
            let step = f[0].parse().map_err(|_| bad(format!("step {:?}", f[0])))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("value {s:?}")));
            let time = num(f[1])?;
            let row = f[2..].iter().map(|s| num(s)).collect::<Result<Vec<f64>>>()?;
            out.push(step, time, row);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_round_trip_is_exact() {
        let mut s = TimeSeries::new(vec!["a".into(), "b".into()]);
        s.push(0, 0.0, vec![1.0 / 3.0, -2e-300]);
        s.push(10, 0.1, vec![f64::MAX, 7.0]);
        let mut buf = Vec::new();
        s.write_tsv(&mut buf).unwrap();
        let back = TimeSeries::read_tsv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.column("b"), Some(vec![-2e-300, 7.0]));
        assert!(back.column("c").is_none());
    }

    #[test]
    fn truncation() {
        let mut s = TimeSeries::new(vec!["a".into()]);
        for i in 0..5 {
            s.push(i * 10, i as f64, vec![0.0]);
        }
        s.truncate_after(25);
        assert_eq!(s.steps, vec![0, 10, 20]);
    }
}
