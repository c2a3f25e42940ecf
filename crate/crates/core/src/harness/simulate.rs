use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::config::{InitConfig, RunConfig};
use super::manifest::{Manifest, SnapshotEntry};
use super::tolerances::{drift_bound, Check, DEFAULT_TOLERANCES};
use super::Outcome;
use crate::error::{Error, Result};
use crate::fields::write_field;
use crate::phasefield::{init_strip, init_well_prepared, EnergyLedger, PhaseFieldSolver, PhaseFieldState};

pub const LEDGER_FILE: &str = "ledger.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub eps: f64,
    pub alpha: f64,
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    /// Reference mass `∫φ(u₀)`.
    pub m0: f64,
    pub e0: f64,
    pub e_s0: f64,
    pub e_s_final: f64,
    pub e_total_final: f64,
    pub max_energy_increase: f64,
    pub volume_drift_max: f64,
    /// `√2 ε^{α/2} √E₀`.
    pub drift_bound: f64,
    pub discrepancy_max: f64,
    /// `τ_disc = 0.05 · E_S(0) / side²`.
    pub tau_disc: f64,
    pub de_giorgi_final: f64,
    pub worst_interval_residual: f64,
}

/// Initial phase field of `config`.
pub fn initial_state(config: &RunConfig) -> Result<PhaseFieldState> {
    let grid = config.grid()?;
    let (eps, alpha) = (config.phase.eps, config.phase.alpha);
    match config.init {
        InitConfig::Strip { lo, hi } => init_strip(grid, lo, hi, eps, alpha),
        _ => {
            let curve = config.init.curve(config.track.n)?.expect("closed shape");
            init_well_prepared(grid, &curve, eps, alpha)
        }
    }
}

/// Steps at which `u` is dumped: every `snapshot_every`, the last step and
/// the step nearest each compare time.
fn snapshot_steps(config: &RunConfig, dt: f64, steps: usize) -> BTreeSet<usize> {
    let mut set: BTreeSet<usize> = (0..=steps).step_by(config.phase.snapshot_every).collect();
    set.insert(steps);
    for t in config.compare_times() {
        set.insert(((t / dt).round() as usize).min(steps));
    }
    set
}

/// Runs the phase-field solver and writes `ledger.csv`, snapshots
/// `u_<index>.bin` and the manifest into `out`. A diverging step still
/// flushes the ledger and manifest before the error is returned.
pub fn simulate(config: &RunConfig, out: &Path) -> Result<Outcome<SimulateSummary>> {
    let config = config.resolved()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let dt = config.phase_dt();
    let steps = ((config.phase.t_end / dt).round() as usize).max(1);
    let solver = PhaseFieldSolver::new(config.grid()?).with_mode(config.phase.mode);
    let mut state = initial_state(&config)?;
    let mut ledger = EnergyLedger::new(state.m0);
    let rhs = solver.rhs(&state)?;
    ledger.record(solver.spectral(), &state, &rhs)?;
    let marks = snapshot_steps(&config, dt, steps);
    let mut manifest = Manifest::new("simulate", Some(config.clone()));
    let snap = |state: &PhaseFieldState, manifest: &mut Manifest| -> Result<()> {
        let index = manifest.snapshots.len();
        let file = format!("u_{index}");
        write_field(&out.join(&file), &state.u, "u", state.t)?;
        manifest.snapshots.push(SnapshotEntry {
            index,
            t: state.t,
            file,
            velocity: None,
        });
        Ok(())
    };
    snap(&state, &mut manifest)?;
    info!(
        "simulate: {} eps={} n={} dt={dt:e} steps={steps}",
        config.init.name(),
        config.phase.eps,
        config.grid.n
    );
    let mut failure = None;
    for k in 1..=steps {
        let next = solver.step(&state, dt).and_then(|mut s| {
            // Avoid accumulating round-off in t.
            s.t = k as f64 * dt;
            let rhs = solver.rhs(&s)?;
            ledger.record(solver.spectral(), &s, &rhs)?;
            Ok(s)
        });
        match next {
            Ok(s) => state = s,
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
        if marks.contains(&k) {
            snap(&state, &mut manifest)?;
        }
        if k % 500 == 0 {
            debug!("step {k}/{steps} t={:.4}", state.t);
        }
    }
    ledger.write_csv(&out.join(LEDGER_FILE))?;
    let summary = summarise(&config, &ledger, dt, ledger.rows().len() - 1);
    let checks = checks(&summary, failure.is_none());
    manifest = manifest.with_summary(&summary, checks.clone());
    manifest.write(out)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Outcome { summary, checks })
}

fn summarise(config: &RunConfig, ledger: &EnergyLedger, dt: f64, steps: usize) -> SimulateSummary {
    let rows = ledger.rows();
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let e0 = first.e_total;
    let side = config.grid.side;
    SimulateSummary {
        eps: config.phase.eps,
        alpha: config.phase.alpha,
        dt,
        steps,
        t_final: last.t,
        m0: first.mass_phi,
        e0,
        e_s0: first.e_s,
        e_s_final: last.e_s,
        e_total_final: last.e_total,
        max_energy_increase: ledger.max_energy_increase(),
        volume_drift_max: ledger.volume_drift_max(),
        drift_bound: drift_bound(config.phase.eps, config.phase.alpha, e0),
        discrepancy_max: ledger.discrepancy_max(),
        tau_disc: DEFAULT_TOLERANCES.tau_disc_factor * first.e_s / (side * side),
        de_giorgi_final: last.de_giorgi_residual,
        worst_interval_residual: ledger.worst_interval_residual(),
    }
}

fn checks(s: &SimulateSummary, finished: bool) -> Vec<Check> {
    let tol = DEFAULT_TOLERANCES;
    vec![
        Check::at_most("finite", if finished { 0.0 } else { 1.0 }, 0.0),
        Check::at_most("energy_monotone", s.max_energy_increase, tol.energy_slack * s.e0),
        Check::at_most("volume_drift", s.volume_drift_max, tol.drift_factor * s.drift_bound),
    ]
}
