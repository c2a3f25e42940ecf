use std::fs;
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

use super::calibrate::certificate;
use super::config::RunConfig;
use super::manifest::{Manifest, SnapshotEntry};
use super::simulate::{SimulateSummary, LEDGER_FILE};
use super::tolerances::Check;
use super::Outcome;
use crate::calibration::{max_tube_radius, verify_static, write_calibration, Calibration};
use crate::entropy::{
    coercivity_report, phase_fraction, phase_indicator, stability_monitor, symmetric_difference, write_comparison_csv,
    write_violations, EntropyReport, StabilitySummary,
};
use crate::error::{Error, Result};
use crate::fields::{read_field, Spectral};
use crate::phasefield::{varifold_proxy, EnergyLedger, PhaseFieldSolver, PhaseFieldState};
use crate::sharpinterface::{read_curve, read_velocity, Curve};

pub const COMPARISON_FILE: &str = "comparison.csv";
pub const PAIRING_FILE: &str = "pairing.csv";
pub const VIOLATIONS_FILE: &str = "violations.json";
pub const STABILITY_FILE: &str = "stability.json";

/// Per-time pairing data beside the entropy report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingRow {
    pub t: f64,
    pub t_phase: f64,
    pub t_track: f64,
    /// `|{u > 1/2} Δ 𝒜(t)|`.
    pub symdiff_area: f64,
    pub lambda_eps: f64,
    pub lambda_star: f64,
    pub e_total: f64,
    pub de_giorgi_residual: f64,
    pub has_b: bool,
    pub certified: bool,
}

/// What `compare` returns: the manifest summary plus the per-time data.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub summary: CompareSummary,
    pub reports: Vec<EntropyReport>,
    pub rows: Vec<PairingRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub times: Vec<f64>,
    pub e_rel_initial: f64,
    pub e_bulk_initial: f64,
    pub e_rel_final: f64,
    pub e_bulk_final: f64,
    pub symdiff_final: f64,
    pub violations: usize,
    pub uncertified: usize,
    pub stability: StabilitySummary,
}

fn read_run(dir: &Path, command: &str) -> Result<(Manifest, RunConfig)> {
    let m = Manifest::read(dir)?;
    if m.command != command {
        return Err(Error::Config {
            key: dir.display().to_string(),
            reason: format!("expected a `{command}` run, found `{}`", m.command),
        });
    }
    let c = m.config.clone().ok_or_else(|| Error::Config {
        key: dir.display().to_string(),
        reason: "manifest has no config".into(),
    })?;
    Ok((m, c))
}

fn ensure_same_setup(config: &RunConfig, other: &RunConfig, which: &str) -> Result<()> {
    if other.init != config.init {
        return Err(Error::Config {
            key: "init".into(),
            reason: format!(
                "{which} run started from {:?}, config has {:?}",
                other.init, config.init
            ),
        });
    }
    Ok(())
}

/// Nearest snapshot to `t`, rejected when further than `tol` away.
fn aligned<'a>(m: &'a Manifest, t: f64, tol: f64, which: &str) -> Result<&'a SnapshotEntry> {
    let s = m
        .nearest_snapshot(t)
        .ok_or_else(|| Error::Misaligned(format!("{which} run has no snapshots")))?;
    if (s.t - t).abs() > tol {
        return Err(Error::Misaligned(format!(
            "{which} snapshot at t = {} is {:e} from compare time {t} (limit {tol:e})",
            s.t,
            (s.t - t).abs()
        )));
    }
    Ok(s)
}

/// Normal speeds with the mean flux removed, so rounding in the tracker's
/// multiplier does not make the data incompatible with volume preservation.
fn compatible_velocity(curve: &Curve, v: &[f64]) -> Vec<f64> {
    let mean = v.iter().zip(curve.ds()).map(|(v, w)| v * w).sum::<f64>() / curve.length();
    v.iter().map(|x| x - mean).collect()
}

/// Pairs a phase-field run with a front-tracking run of the same initial
/// shape at the compare times of `config`. Writes per-time calibrations under
/// `calibrations/`, `comparison.csv`, `pairing.csv`, `violations.json`,
/// `stability.json` and the manifest.
pub fn compare(config: &RunConfig, phase_dir: &Path, track_dir: &Path, out: &Path) -> Result<Outcome<Comparison>> {
    let config = config.resolved()?;
    let (pm, pc) = read_run(phase_dir, "simulate")?;
    let (tm, tc) = read_run(track_dir, "track")?;
    ensure_same_setup(&config, &pc, "phase-field")?;
    ensure_same_setup(&config, &tc, "front-tracking")?;
    if pc.grid != config.grid {
        return Err(Error::GridMismatch(format!(
            "phase run on {:?}, config has {:?}",
            pc.grid, config.grid
        )));
    }
    let ps: SimulateSummary = pm.summary_as(phase_dir)?;
    let ledger = EnergyLedger::read_csv(&phase_dir.join(LEDGER_FILE))?;
    // A compare time halfway between two steps is admissible; the slack
    // absorbs the rounding in `k·dt`.
    let tol = 0.5 * ps.dt * (1.0 + 1e-9);
    let solver = PhaseFieldSolver::new(pc.grid()?).with_mode(pc.phase.mode);
    let spectral: &Spectral = solver.spectral();
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let times = config.compare_times();
    let (mut reports, mut rows) = (Vec::new(), Vec::new());
    let (mut lambdas, mut stars) = (Vec::new(), Vec::new());
    let mut uncertified = 0;
    for (i, &t) in times.iter().enumerate() {
        let ps_entry = aligned(&pm, t, tol, "phase-field")?;
        let ts_entry = aligned(&tm, t, tol, "front-tracking")?;
        if let Some(prev) = rows.last().map(|r: &PairingRow| r.t_phase) {
            if !(ps_entry.t > prev) {
                return Err(Error::Misaligned(format!(
                    "compare time {t} resolves to the phase-field snapshot at t = {prev} already used"
                )));
            }
        }
        let (u, meta) = read_field(&phase_dir.join(&ps_entry.file))?;
        let state = PhaseFieldState {
            u,
            t: meta.time,
            eps: ps.eps,
            alpha: ps.alpha,
            m0: ps.m0,
        };
        let rhs = solver.rhs(&state)?;
        let proxy = varifold_proxy(spectral, &state, &rhs)?;
        let chi = phase_indicator(&state.u);
        let fraction = phase_fraction(spectral, &state.u)?;

        let (curve, _) = read_curve(&track_dir.join(&ts_entry.file))?;
        let vel_file = ts_entry.velocity.as_ref().ok_or_else(|| Error::Format {
            path: track_dir.to_path_buf(),
            reason: format!("snapshot {} has no velocity column", ts_entry.index),
        })?;
        let v = compatible_velocity(&curve, &read_velocity(&track_dir.join(vel_file))?);
        // The tube radius is fixed on the initial curve; the tracked curve may
        // sharpen, so it is capped at the current curvature limit.
        let delta = config.calib.delta.map(|d| d.min(max_tube_radius(&curve)));
        let cal = Calibration::build(spectral, &curve, Some(&v), delta, ts_entry.t)?;
        let res = verify_static(spectral, &cal)?;
        write_calibration(&out.join("calibrations").join(format!("t_{i}")), &cal, &res)?;
        let certified = certificate(&res).iter().all(|c| c.passed);
        uncertified += usize::from(!certified);

        let mut report = coercivity_report(state.t, &proxy, &chi, &fraction, &cal, &res)?;
        let rec = ledger
            .iter()
            .min_by(|a, b| (a.t - state.t).abs().total_cmp(&(b.t - state.t).abs()))
            .ok_or(Error::EmptySeries("phase-field ledger"))?;
        report.de_giorgi_residual = Some(rec.de_giorgi_residual);
        info!(
            "compare t={t}: E_rel={:.4e} E_bulk={:.4e} violations={}",
            report.e_rel,
            report.e_bulk,
            report.violations().len()
        );
        rows.push(PairingRow {
            t,
            t_phase: state.t,
            t_track: ts_entry.t,
            symdiff_area: symmetric_difference(&fraction, &cal)?,
            lambda_eps: state.lambda_eps(),
            lambda_star: cal.lambda_star,
            e_total: rec.e_total,
            de_giorgi_residual: rec.de_giorgi_residual,
            has_b: cal.b.is_some(),
            certified,
        });
        lambdas.push(state.lambda_eps());
        stars.push(cal.lambda_star);
        reports.push(report);
    }

    write_comparison_csv(&out.join(COMPARISON_FILE), &reports)?;
    write_pairing(&out.join(PAIRING_FILE), &rows)?;
    let violations = write_violations(&out.join(VIOLATIONS_FILE), &reports)?;
    let stability = stability_monitor(&reports, &lambdas, &stars)?;
    let path = out.join(STABILITY_FILE);
    let text = serde_json::to_string_pretty(&stability).expect("stability serialises");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;

    let (first, last) = (&reports[0], &reports[reports.len() - 1]);
    let summary = CompareSummary {
        times,
        e_rel_initial: first.e_rel,
        e_bulk_initial: first.e_bulk,
        e_rel_final: last.e_rel,
        e_bulk_final: last.e_bulk,
        symdiff_final: rows[rows.len() - 1].symdiff_area,
        violations,
        uncertified,
        stability: stability.clone(),
    };
    let checks = vec![
        Check::at_most("coercivity_violations", violations as f64, 0.0),
        Check::at_most("uncertified_calibrations", uncertified as f64, 0.0),
        Check::at_most("stability_bounded", if stability.bounded() { 0.0 } else { 1.0 }, 0.0),
    ];
    let mut manifest = Manifest::new("compare", Some(config));
    manifest.inputs.insert("phase".into(), phase_dir.display().to_string());
    manifest.inputs.insert("track".into(), track_dir.display().to_string());
    manifest.with_summary(&summary, checks.clone()).write(out)?;
    Ok(Outcome {
        summary: Comparison { summary, reports, rows },
        checks,
    })
}

fn write_pairing(path: &Path, rows: &[PairingRow]) -> Result<()> {
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

/// Reads `pairing.csv` of a compare directory.
pub fn read_pairing(dir: &Path) -> Result<Vec<PairingRow>> {
    let path = dir.join(PAIRING_FILE);
    let fmt = |e: csv::Error| Error::Format {
        path: path.clone(),
        reason: e.to_string(),
    };
    let mut r = csv::Reader::from_path(&path).map_err(fmt)?;
    r.deserialize().map(|row| row.map_err(fmt)).collect()
}
