use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::tolerances::{Check, Tolerances, DEFAULT_TOLERANCES};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Version string recorded in every manifest.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// A snapshot written by a run: file stem (relative to the run directory)
/// and its time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub index: usize,
    pub t: f64,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<String>,
}

/// `manifest.json`: resolved config, code version, tolerances, inputs,
/// snapshots, a command-specific summary and the invariant checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub config: Option<RunConfig>,
    pub tolerances: Tolerances,
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    #[serde(default)]
    pub snapshots: Vec<SnapshotEntry>,
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Manifest {
    pub fn new(command: &str, config: Option<RunConfig>) -> Self {
        Self {
            version: CODE_VERSION.to_string(),
            command: command.to_string(),
            config,
            tolerances: DEFAULT_TOLERANCES,
            inputs: BTreeMap::new(),
            snapshots: Vec::new(),
            summary: serde_json::Value::Null,
            checks: Vec::new(),
            passed: false,
        }
    }

    pub fn with_summary<S: Serialize>(mut self, summary: &S, checks: Vec<Check>) -> Self {
        self.summary = serde_json::to_value(summary).expect("summary serialises");
        self.passed = checks.iter().all(|c| c.passed);
        self.checks = checks;
        self
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path,
            reason: e.to_string(),
        })
    }

    /// The summary as `S`.
    pub fn summary_as<S: for<'de> Deserialize<'de>>(&self, dir: &Path) -> Result<S> {
        serde_json::from_value(self.summary.clone()).map_err(|e| Error::Format {
            path: dir.join(MANIFEST_FILE),
            reason: format!("summary: {e}"),
        })
    }

    /// Snapshot closest in time to `t`; ties go to the later one, as the
    /// pipelines round half steps up when placing snapshots.
    pub fn nearest_snapshot(&self, t: f64) -> Option<&SnapshotEntry> {
        self.snapshots
            .iter()
            .max_by(|a, b| (b.t - t).abs().total_cmp(&(a.t - t).abs()))
    }
}
