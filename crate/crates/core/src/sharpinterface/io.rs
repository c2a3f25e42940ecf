//! Curve snapshots (`x, y` CSV plus JSON sidecar), velocity columns and the
//! per-step metrics row.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::curve::Curve;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSidecar {
    pub t: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "A")]
    pub area: f64,
    pub lambda: f64,
}

/// Row of the front-tracking metrics table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontMetrics {
    pub t: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "A")]
    pub area: f64,
    pub lambda: f64,
    pub max_kappa: f64,
    pub min_kappa: f64,
}

impl FrontMetrics {
    pub fn of(curve: &Curve, t: f64, lambda: f64) -> Self {
        let k = curve.kappa();
        Self {
            t,
            length: curve.length(),
            area: curve.area(),
            lambda,
            max_kappa: k.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_kappa: k.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Node {
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct Speed {
    #[serde(rename = "V")]
    v: f64,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

/// Writes `path` (CSV) and the sidecar next to it with a `.json` extension.
pub fn write_curve(path: &Path, curve: &Curve, t: f64, lambda: f64) -> Result<()> {
    write_rows(path, curve.points().iter().map(|p| Node { x: p[0], y: p[1] }))?;
    let side = CurveSidecar {
        t,
        n: curve.len(),
        length: curve.length(),
        area: curve.area(),
        lambda,
    };
    let json = path.with_extension("json");
    let text = serde_json::to_string_pretty(&side).expect("sidecar serialises");
    fs::write(&json, text).map_err(|e| Error::io(&json, e))
}

/// Reads a curve snapshot; the sidecar is optional.
pub fn read_curve(path: &Path) -> Result<(Curve, Option<CurveSidecar>)> {
    let nodes: Vec<Node> = read_rows(path)?;
    let curve = Curve::new(nodes.into_iter().map(|n| [n.x, n.y]).collect())?;
    let json = path.with_extension("json");
    let side = match fs::read_to_string(&json) {
        Ok(text) => Some(serde_json::from_str(&text).map_err(|e| Error::Format {
            path: json.clone(),
            reason: e.to_string(),
        })?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(Error::io(&json, e)),
    };
    Ok((curve, side))
}

pub fn write_velocity(path: &Path, v: &[f64]) -> Result<()> {
    write_rows(path, v.iter().map(|&v| Speed { v }))
}

pub fn read_velocity(path: &Path) -> Result<Vec<f64>> {
    Ok(read_rows::<Speed>(path)?.into_iter().map(|s| s.v).collect())
}

pub fn write_metrics(path: &Path, rows: &[FrontMetrics]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_metrics(path: &Path) -> Result<Vec<FrontMetrics>> {
    read_rows(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Curve::ellipse([0.5, 0.5], 0.3, 0.2, 64).unwrap();
        let p = dir.path().join("curve_0.csv");
        write_curve(&p, &c, 0.25, 4.5).unwrap();
        let header = fs::read_to_string(&p).unwrap();
        assert!(header.starts_with("x,y\n"));
        let (back, side) = read_curve(&p).unwrap();
        let side = side.unwrap();
        assert_eq!(side.n, 64);
        assert_eq!(side.t, 0.25);
        for (a, b) in c.points().iter().zip(back.points()) {
            assert_eq!(a, b);
        }
        let json = fs::read_to_string(p.with_extension("json")).unwrap();
        for key in ["\"t\"", "\"N\"", "\"L\"", "\"A\"", "\"lambda\""] {
            assert!(json.contains(key));
        }
    }

    #[test]
    fn velocity_and_metrics_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        write_velocity(&p, &[0.5, -1.25, 3.0]).unwrap();
        assert!(fs::read_to_string(&p).unwrap().starts_with("V\n"));
        assert_eq!(read_velocity(&p).unwrap(), vec![0.5, -1.25, 3.0]);
        let c = Curve::circle([0.0, 0.0], 0.25, 32).unwrap();
        let m = dir.path().join("m.csv");
        write_metrics(&m, &[FrontMetrics::of(&c, 0.0, 4.0)]).unwrap();
        assert!(fs::read_to_string(&m)
            .unwrap()
            .starts_with("t,L,A,lambda,max_kappa,min_kappa\n"));
        assert_eq!(read_metrics(&m).unwrap().len(), 1);
    }
}
