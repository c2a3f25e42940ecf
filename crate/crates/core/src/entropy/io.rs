use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EntropyReport, INEQUALITIES};
use crate::error::{Error, Result};

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

/// `t, E_rel, E_rel_alt, E_bulk`, then `<name>_lhs, <name>_rhs` per
/// inequality.
pub fn write_comparison_csv(path: &Path, reports: &[EntropyReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec!["t".to_string(), "E_rel".into(), "E_rel_alt".into(), "E_bulk".into()];
    for n in INEQUALITIES {
        header.push(format!("{n}_lhs"));
        header.push(format!("{n}_rhs"));
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for r in reports {
        let mut row = vec![r.t, r.e_rel, r.e_rel_alt, r.e_bulk];
        for c in &r.coercivity {
            row.push(c.lhs);
            row.push(c.rhs);
        }
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationEntry {
    pub t: f64,
    pub name: String,
}

/// Writes the violations of all reports as a JSON list; returns their number.
pub fn write_violations(path: &Path, reports: &[EntropyReport]) -> Result<usize> {
    let list: Vec<ViolationEntry> = reports
        .iter()
        .flat_map(|r| {
            r.violations().into_iter().map(move |n| ViolationEntry {
                t: r.t,
                name: n.to_string(),
            })
        })
        .collect();
    let text = serde_json::to_string_pretty(&list).expect("violations serialise");
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(list.len())
}
