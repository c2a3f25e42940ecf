use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{discrepancy_field, energies, PhaseFieldState};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, Spectral};

/// One row of the energy ledger. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    #[serde(rename = "E_S")]
    pub e_s: f64,
    #[serde(rename = "E_P")]
    pub e_p: f64,
    #[serde(rename = "E_total")]
    pub e_total: f64,
    pub lambda_eps: f64,
    pub mass_phi: f64,
    /// `∫ ε (∂ₜu)²` with `ε∂ₜu` taken as the right-hand side.
    pub diss_velocity: f64,
    /// `∫ ε⁻¹ (εΔu − W′/ε + λ√(2W))²`.
    pub diss_curvature: f64,
    pub discrepancy_max: f64,
    /// `E(t) − E(0) + Σ dt · ½(diss_velocity + diss_curvature)`.
    pub de_giorgi_residual: f64,
}

impl EnergyRecord {
    /// Evaluates all columns except the cumulative residual (left at 0).
    pub fn compute(spectral: &Spectral, state: &PhaseFieldState, rhs: &ScalarField) -> Result<Self> {
        let (e_s, e_p) = energies(spectral, state)?;
        let d = rhs.values().iter().map(|r| r * r).sum::<f64>() * state.grid().cell_area() / state.eps;
        let disc = discrepancy_field(spectral, state)?;
        Ok(Self {
            t: state.t,
            e_s,
            e_p,
            e_total: e_s + e_p,
            lambda_eps: state.lambda_eps(),
            mass_phi: state.mass_phi(),
            diss_velocity: d,
            diss_curvature: d,
            discrepancy_max: disc.max(),
            de_giorgi_residual: 0.0,
        })
    }

    /// Total dissipation rate `½(diss_velocity + diss_curvature)`.
    pub fn dissipation(&self) -> f64 {
        0.5 * (self.diss_velocity + self.diss_curvature)
    }
}

/// Time-ordered energy records of one run.
///
/// The dissipation integral uses the rate at the end of each interval, which
/// matches the backward-Euler update where `ε(u⁺ − u)/dt` is the right-hand
/// side evaluated at `u⁺`.
#[derive(Clone, Debug, Default)]
pub struct EnergyLedger {
    rows: Vec<EnergyRecord>,
    m0: f64,
    dissipated: f64,
}

impl EnergyLedger {
    pub fn new(m0: f64) -> Self {
        Self {
            rows: Vec::new(),
            m0,
            dissipated: 0.0,
        }
    }

    pub fn push(&mut self, mut rec: EnergyRecord) -> Result<&EnergyRecord> {
        if let Some(last) = self.rows.last() {
            if !(rec.t > last.t) {
                return Err(Error::param(
                    "t",
                    format!("ledger times must increase: {} after {}", rec.t, last.t),
                ));
            }
            self.dissipated += (rec.t - last.t) * rec.dissipation();
            rec.de_giorgi_residual = rec.e_total - self.rows[0].e_total + self.dissipated;
        } else {
            rec.de_giorgi_residual = 0.0;
        }
        self.rows.push(rec);
        Ok(self.rows.last().expect("just pushed"))
    }

    /// Evaluates and appends the record of `state`.
    pub fn record(&mut self, spectral: &Spectral, state: &PhaseFieldState, rhs: &ScalarField) -> Result<&EnergyRecord> {
        let rec = EnergyRecord::compute(spectral, state, rhs)?;
        self.push(rec)
    }

    pub fn rows(&self) -> &[EnergyRecord] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn e0(&self) -> Option<f64> {
        self.rows.first().map(|r| r.e_total)
    }

    /// Largest single-step increase of `E_total`.
    pub fn max_energy_increase(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].e_total - w[0].e_total)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_t |∫φ(u) − m₀|`.
    pub fn volume_drift_max(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.mass_phi - self.m0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest residual over all pairs `s < t` of recorded times:
    /// `max (R(t) − R(s))`, with `R` the cumulative residual.
    pub fn worst_interval_residual(&self) -> f64 {
        let mut lowest = f64::INFINITY;
        let mut worst = f64::NEG_INFINITY;
        for r in &self.rows {
            if lowest.is_finite() {
                worst = worst.max(r.de_giorgi_residual - lowest);
            }
            lowest = lowest.min(r.de_giorgi_residual);
        }
        worst
    }

    /// `max_t discrepancy_max`.
    pub fn discrepancy_max(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.discrepancy_max)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Format {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Vec<EnergyRecord>> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        r.deserialize()
            .map(|row| {
                row.map_err(|e| Error::Format {
                    path: path.to_path_buf(),
                    reason: e.to_string(),
                })
            })
            .collect()
    }
}
