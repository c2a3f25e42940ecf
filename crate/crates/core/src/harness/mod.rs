//! Run orchestration: configuration, the `simulate`, `track`, `calibrate`,
//! `compare` and `sweep` pipelines, and artifact directories.
//!
//! Every artifact directory holds a `manifest.json` with the resolved config,
//! the code version, the tolerance table and the invariant checks of the run.
//! Nothing in a pipeline is random, so identical configs give byte-identical
//! CSV output.

mod calibrate;
mod compare;
mod config;
mod manifest;
mod simulate;
mod sweep;
mod tolerances;
mod track;

pub use calibrate::{calibrate, certificate, CalibrateSummary};
pub use compare::{
    compare, read_pairing, CompareSummary, Comparison, PairingRow, COMPARISON_FILE, PAIRING_FILE, STABILITY_FILE,
    VIOLATIONS_FILE,
};
pub use config::{
    CalibConfig, CompareConfig, GridConfig, InitConfig, OutputConfig, PhaseConfig, RunConfig, SweepPlan, TrackConfig,
    OUTPUT_ENV, TRACK_DT_FRACTION,
};
pub use manifest::{Manifest, SnapshotEntry, CODE_VERSION, MANIFEST_FILE};
pub use simulate::{initial_state, simulate, SimulateSummary, LEDGER_FILE};
pub use sweep::{sweep, SweepRow, SweepSummary, SWEEP_FILE};
pub use tolerances::{drift_bound, Check, Tolerances, DEFAULT_TOLERANCES};
pub use track::{track, TrackSummary, MAX_METRIC_ROWS, METRICS_FILE};

/// Result of a pipeline that ran to completion: its summary and invariant
/// checks. Errors (bad input, divergence) are reported through `Result`.
#[derive(Clone, Debug)]
pub struct Outcome<S> {
    pub summary: S,
    pub checks: Vec<Check>,
}

impl<S> Outcome<S> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
