use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::compare::compare;
use super::config::{RunConfig, SweepPlan};
use super::manifest::Manifest;
use super::simulate::simulate;
use super::tolerances::{Check, DEFAULT_TOLERANCES};
use super::track::track;
use super::Outcome;
use crate::error::{Error, Result};

pub const SWEEP_FILE: &str = "sweep.csv";

/// One row of the sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub n: usize,
    pub dt: f64,
    #[serde(rename = "E_S_T")]
    pub e_s_final: f64,
    pub volume_drift_max: f64,
    pub drift_bound: f64,
    pub symdiff_area: f64,
    #[serde(rename = "E_rel_T")]
    pub e_rel_final: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
}

fn member_dir(out: &Path, config: &RunConfig) -> PathBuf {
    out.join(format!("eps_{}_n{}", config.phase.eps, config.grid.n))
}

fn run_member(config: &RunConfig, out: &Path, track_dir: &Path) -> Result<SweepRow> {
    let dir = member_dir(out, config);
    let sim = simulate(config, &dir.join("phase"))?;
    let cmp = compare(config, &dir.join("phase"), track_dir, &dir.join("compare"))?;
    let s = &sim.summary;
    let row = SweepRow {
        eps: s.eps,
        n: config.grid.n,
        dt: s.dt,
        e_s_final: s.e_s_final,
        volume_drift_max: s.volume_drift_max,
        drift_bound: s.drift_bound,
        symdiff_area: cmp.summary.summary.symdiff_final,
        e_rel_final: cmp.summary.summary.e_rel_final,
        passed: sim.passed() && cmp.passed() && s.volume_drift_max <= DEFAULT_TOLERANCES.drift_factor * s.drift_bound,
    };
    Ok(row)
}

fn write_table(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let fmt = |e: csv::Error| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(fmt)?;
    for r in rows {
        w.serialize(r).map_err(fmt)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs simulate and compare for every member of `plan` against one shared
/// front-tracking run, with up to `workers` members in parallel (default:
/// available parallelism). The table `sweep.csv` lists completed members in
/// plan order; a failing member stops the remaining ones and its error is
/// returned after the partial table is written.
pub fn sweep(plan: &SweepPlan, out: &Path, workers: Option<usize>) -> Result<Outcome<SweepSummary>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let track_dir = out.join("track");
    let tracked = track(&plan.base, &track_dir)?;
    if !tracked.passed() {
        warn!("sweep: front-tracking invariants failed");
    }
    let members = plan.members();
    let workers = workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, members.len());
    info!("sweep: {} members on {workers} workers", members.len());

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Result<SweepRow>>>> = Mutex::new((0..members.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(config) = members.get(i) else { break };
                let r = run_member(config, out, &track_dir);
                if r.is_err() {
                    abort.store(true, Ordering::SeqCst);
                }
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });

    let mut rows = Vec::new();
    let mut failure = None;
    for r in results.into_inner().expect("no worker panicked").into_iter().flatten() {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    write_table(&out.join(SWEEP_FILE), &rows)?;
    let mut checks: Vec<Check> = tracked.checks.clone();
    for r in &rows {
        checks.push(Check::at_most(
            format!("volume_drift[eps={}, n={}]", r.eps, r.n),
            r.volume_drift_max,
            DEFAULT_TOLERANCES.drift_factor * r.drift_bound,
        ));
        checks.push(Check::at_most(
            format!("member[eps={}, n={}]", r.eps, r.n),
            if r.passed { 0.0 } else { 1.0 },
            0.0,
        ));
    }
    let summary = SweepSummary { rows };
    let mut manifest = Manifest::new("sweep", Some(plan.base.clone()));
    manifest.inputs.insert(
        "eps".into(),
        plan.eps_list
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.inputs.insert(
        "grids".into(),
        plan.grid_list
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.with_summary(&summary, checks.clone()).write(out)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(Outcome { summary, checks }),
    }
}
