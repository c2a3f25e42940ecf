//! Flat little-endian `f64` dumps with a JSON sidecar.
//!
//! `stem.bin` holds the samples row-major; `stem.json` holds
//! `{n_x, n_y, side, name, time}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PeriodicGrid, ScalarField};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub n_x: usize,
    pub n_y: usize,
    pub side: f64,
    pub name: String,
    pub time: f64,
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `stem.bin` and `stem.json`.
pub fn write_field(stem: &Path, field: &ScalarField, name: &str, time: f64) -> Result<()> {
    let g = field.grid();
    let mut bytes = Vec::with_capacity(8 * g.len());
    for v in field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let bin = with_ext(stem, "bin");
    fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
    let meta = FieldMeta {
        n_x: g.n(),
        n_y: g.n(),
        side: g.side(),
        name: name.to_string(),
        time,
    };
    let json = with_ext(stem, "json");
    let text = serde_json::to_string_pretty(&meta).expect("field metadata serialises");
    fs::write(&json, text).map_err(|e| Error::io(&json, e))?;
    Ok(())
}

/// Reads a dump written by [`write_field`]; `stem` may carry a `.bin` suffix.
pub fn read_field(stem: &Path) -> Result<(ScalarField, FieldMeta)> {
    let stem = if stem.extension().is_some_and(|e| e == "bin" || e == "json") {
        stem.with_extension("")
    } else {
        stem.to_path_buf()
    };
    let json = with_ext(&stem, "json");
    let text = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    let meta: FieldMeta = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: json.clone(),
        reason: e.to_string(),
    })?;
    if meta.n_x != meta.n_y {
        return Err(Error::Format {
            path: json,
            reason: format!("non-square grid {}x{}", meta.n_x, meta.n_y),
        });
    }
    let grid = PeriodicGrid::new(meta.n_x, meta.side)?;
    let bin = with_ext(&stem, "bin");
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::Format {
            path: bin,
            reason: format!("expected {} bytes, found {}", 8 * grid.len(), bytes.len()),
        });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((ScalarField::new(grid, values)?, meta))
}
