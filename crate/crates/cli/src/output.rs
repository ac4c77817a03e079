use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

pub const COLUMNS: [&str; 10] = ["scenario", "d", "n", "index", "space", "metric", "measured", "bound", "slack", "wall_ms"];

/// Measured value; infinite norms are written as a marker, never as a float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measured {
    Value(f64),
    Infinite,
}

impl Measured {
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            Measured::Infinite
        } else {
            Measured::Value(x)
        }
    }

    fn cell(self) -> String {
        match self {
            Measured::Value(x) => x.to_string(),
            Measured::Infinite => "+inf".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Row {
    pub scenario: &'static str,
    pub d: usize,
    pub n: usize,
    /// `m` or `k`.
    pub index: u32,
    pub space: String,
    pub metric: String,
    pub measured: Measured,
    pub bound: Option<f64>,
    pub wall_ms: u64,
    /// Grid key: (space position, index, metric position).
    pub key: (usize, u32, usize),
}

impl Row {
    pub fn slack(&self) -> Option<f64> {
        match (self.measured, self.bound) {
            (Measured::Value(m), Some(b)) => Some(b - m),
            _ => None,
        }
    }

    /// Negative slack beyond `1e-9·max(1, |bound|)`.
    pub fn violates(&self) -> bool {
        match (self.slack(), self.bound) {
            (Some(s), Some(b)) => s < -1e-9 * b.abs().max(1.0),
            _ => false,
        }
    }

    fn record(&self) -> [String; 10] {
        let opt = |x: Option<f64>| x.map_or_else(|| "na".to_string(), |v| v.to_string());
        [
            self.scenario.to_string(),
            self.d.to_string(),
            self.n.to_string(),
            self.index.to_string(),
            self.space.clone(),
            self.metric.clone(),
            self.measured.cell(),
            opt(self.bound),
            opt(self.slack()),
            self.wall_ms.to_string(),
        ]
    }
}

pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.metric.cmp(&b.metric)));
}

pub fn csv_bytes(rows: &[Row]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(measured: Measured, bound: Option<f64>) -> Row {
        Row {
            scenario: "mult1d",
            d: 4,
            n: 1,
            index: 0,
            space: "lorentz(pwl[(0,0),(1,1)])".into(),
            metric: "comm_space".into(),
            measured,
            bound,
            wall_ms: 0,
            key: (0, 0, 0),
        }
    }

    #[test]
    fn cells_and_quoting() {
        let bytes = csv_bytes(&[row(Measured::Value(0.25), Some(0.5)), row(Measured::Infinite, None)]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], COLUMNS.join(","));
        assert_eq!(lines[1], "mult1d,4,1,0,\"lorentz(pwl[(0,0),(1,1)])\",comm_space,0.25,0.5,0.25,0");
        assert!(lines[2].ends_with(",+inf,na,na,0"));
    }

    #[test]
    fn floats_round_trip() {
        let x = 0.1 + 0.2;
        let r = row(Measured::Value(x), Some(1.0 / 3.0));
        let rec = r.record();
        assert_eq!(rec[6].parse::<f64>().unwrap(), x);
        assert_eq!(rec[8].parse::<f64>().unwrap(), 1.0 / 3.0 - x);
    }

    #[test]
    fn violation_threshold() {
        assert!(!row(Measured::Value(1.0 + 1e-12), Some(1.0)).violates());
        assert!(row(Measured::Value(1.0 + 1e-6), Some(1.0)).violates());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
