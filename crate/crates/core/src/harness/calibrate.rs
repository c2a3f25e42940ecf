use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::Manifest;
use super::tolerances::{Check, DEFAULT_TOLERANCES};
use super::Outcome;
use crate::calibration::{verify_static, write_calibration, Calibration, CalibrationResiduals};
use crate::error::{Error, Result};
use crate::fields::{PeriodicGrid, Spectral};
use crate::sharpinterface::{read_curve, read_velocity};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrateSummary {
    pub t: f64,
    pub lambda_star: f64,
    pub delta: f64,
    pub has_b: bool,
    pub residuals: CalibrationResiduals,
}

/// Pointwise certificate of a calibration: `|ξ| ≤ 1`, shortness,
/// coercivity of `ϑ` and the support of `B`.
pub fn certificate(res: &CalibrationResiduals) -> Vec<Check> {
    let tol = DEFAULT_TOLERANCES;
    vec![
        Check::at_most("xi_max", res.xi_max, 1.0 + tol.shortness_slack),
        Check::at_most("shortness", res.shortness_slack, tol.shortness_slack),
        Check::at_most("theta_coercivity", res.theta_coercivity as f64, 0.0),
        Check::at_most("b_support", res.support_violations as f64, 0.0),
    ]
}

/// Calibrates the curve snapshot at `curve_path` with the normal speeds in
/// `velocity_path` on an `n × n` grid and dumps the fields to `out`.
pub fn calibrate(
    curve_path: &Path,
    velocity_path: Option<&Path>,
    grid: PeriodicGrid,
    delta: Option<f64>,
    out: &Path,
) -> Result<Outcome<CalibrateSummary>> {
    let (curve, sidecar) = read_curve(curve_path)?;
    let t = sidecar.map_or(0.0, |s| s.t);
    let velocity = velocity_path.map(read_velocity).transpose()?;
    let spectral = Spectral::new(grid);
    let cal = Calibration::build(&spectral, &curve, velocity.as_deref(), delta, t)?;
    let residuals = verify_static(&spectral, &cal)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_calibration(out, &cal, &residuals)?;
    let checks = certificate(&residuals);
    let summary = CalibrateSummary {
        t,
        lambda_star: cal.lambda_star,
        delta: cal.delta,
        has_b: cal.b.is_some(),
        residuals,
    };
    let mut manifest = Manifest::new("calibrate", None);
    manifest.inputs.insert("curve".into(), curve_path.display().to_string());
    if let Some(v) = velocity_path {
        manifest.inputs.insert("velocity".into(), v.display().to_string());
    }
    manifest
        .inputs
        .insert("grid".into(), format!("{}x{} side {}", grid.n(), grid.n(), grid.side()));
    manifest.with_summary(&summary, checks.clone()).write(out)?;
    Ok(Outcome { summary, checks })
}
