use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::manifest::{Manifest, SnapshotEntry};
use super::tolerances::{Check, DEFAULT_TOLERANCES};
use super::Outcome;
use crate::error::{Error, Result};
use crate::sharpinterface::{step, write_curve, write_metrics, write_velocity, FrontMetrics, LambdaMode};

pub const METRICS_FILE: &str = "metrics.csv";

/// Upper bound on the rows of `metrics.csv`; longer runs are subsampled.
pub const MAX_METRIC_ROWS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    pub length0: f64,
    pub length_final: f64,
    pub area0: f64,
    /// `max_t |A(t) − A(0)| / A(0)`.
    pub area_drift: f64,
    /// Largest single-step perimeter increase.
    pub max_length_increase: f64,
    /// `Σ dt ∫(κ − λ)² ds`.
    pub dissipation: f64,
    /// `|L(0) − L(T) − dissipation|`.
    pub de_giorgi_gap: f64,
    /// `L²/(4πA) − 1` at the final time.
    pub isoperimetric_excess: f64,
}

/// Runs the front tracker from the initial shape of `config` to
/// `phase.t_end`. Writes `metrics.csv`, and at `t = 0`, the last step and the
/// steps nearest the compare times a curve snapshot `curve_<index>.csv` (with
/// sidecar) and the nodal normal speed `velocity_<index>.csv`.
pub fn track(config: &RunConfig, out: &Path) -> Result<Outcome<TrackSummary>> {
    let config = config.resolved()?;
    let first = config.init.curve(config.track.n)?.ok_or_else(|| Error::Config {
        key: "init.shape".into(),
        reason: "the strip has no closed interface to track".into(),
    })?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let dt = config.track_dt(&first);
    let t_end = config.phase.t_end;
    let steps = ((t_end / dt).round() as usize).max(1);
    let mut marks: BTreeSet<usize> = [0, steps].into_iter().collect();
    for t in config.compare_times() {
        marks.insert(((t / dt).round() as usize).min(steps));
    }
    let stride = steps.div_ceil(MAX_METRIC_ROWS).max(1);
    info!("track: {} dt={dt:e} steps={steps}", config.init.name());

    let mut manifest = Manifest::new("track", Some(config.clone()));
    let mut metrics = Vec::new();
    let (l0, a0) = (first.length(), first.area());
    let (mut area_drift, mut max_inc, mut dissipation) = (0.0_f64, f64::NEG_INFINITY, 0.0);
    let mut curve = first;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let next = step(&curve, dt, config.track.mode)?;
        if k % stride == 0 || k == steps {
            metrics.push(FrontMetrics::of(&curve, t, next.lambda));
        }
        if marks.contains(&k) {
            let index = manifest.snapshots.len();
            let (file, vel) = (format!("curve_{index}.csv"), format!("velocity_{index}.csv"));
            write_curve(&out.join(&file), &curve, t, next.lambda)?;
            write_velocity(&out.join(&vel), &next.velocity)?;
            manifest.snapshots.push(SnapshotEntry {
                index,
                t,
                file,
                velocity: Some(vel),
            });
        }
        if k == steps {
            break;
        }
        dissipation += dt * next.dissipation;
        max_inc = max_inc.max(next.curve.length() - curve.length());
        area_drift = area_drift.max((next.curve.area() - a0).abs() / a0);
        curve = next.curve;
    }
    write_metrics(&out.join(METRICS_FILE), &metrics)?;
    let summary = TrackSummary {
        dt,
        steps,
        t_final: steps as f64 * dt,
        length0: l0,
        length_final: curve.length(),
        area0: a0,
        area_drift,
        max_length_increase: max_inc,
        dissipation,
        de_giorgi_gap: (l0 - curve.length() - dissipation).abs(),
        isoperimetric_excess: curve.length().powi(2) / (4.0 * std::f64::consts::PI * curve.area()) - 1.0,
    };
    let tol = DEFAULT_TOLERANCES;
    let area_tol = match config.track.mode {
        LambdaMode::Projected => tol.strong_area_projected,
        LambdaMode::Analytic => tol.strong_area_analytic,
    };
    let checks = vec![
        Check::at_most("area_drift", summary.area_drift, area_tol),
        Check::at_most(
            "perimeter_monotone",
            summary.max_length_increase,
            tol.perimeter_slack * l0,
        ),
        Check::at_most(
            "strong_de_giorgi",
            summary.de_giorgi_gap,
            tol.strong_de_giorgi_rel * (l0 - curve.length()).abs() + tol.perimeter_slack * l0,
        ),
    ];
    manifest = manifest.with_summary(&summary, checks.clone());
    manifest.write(out)?;
    Ok(Outcome { summary, checks })
}
