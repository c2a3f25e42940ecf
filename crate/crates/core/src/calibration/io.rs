//! Calibration dump: `xi_x`, `xi_y`, `theta` (and `b_x`, `b_y` when built)
//! in the binary field format, plus `calibration.json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Calibration, CalibrationResiduals};
use crate::error::{Error, Result};
use crate::fields::write_field;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub t: f64,
    pub lambda_star: f64,
    pub delta: f64,
    pub has_b: bool,
    pub residuals: CalibrationResiduals,
}

pub fn write_calibration(dir: &Path, cal: &Calibration, residuals: &CalibrationResiduals) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_field(&dir.join("xi_x"), &cal.xi.component(0), "xi_x", cal.t)?;
    write_field(&dir.join("xi_y"), &cal.xi.component(1), "xi_y", cal.t)?;
    write_field(&dir.join("theta"), &cal.theta, "theta", cal.t)?;
    if let Some(b) = &cal.b {
        write_field(&dir.join("b_x"), &b.component(0), "b_x", cal.t)?;
        write_field(&dir.join("b_y"), &b.component(1), "b_y", cal.t)?;
    }
    let summary = CalibrationSummary {
        t: cal.t,
        lambda_star: cal.lambda_star,
        delta: cal.delta,
        has_b: cal.b.is_some(),
        residuals: residuals.clone(),
    };
    let path = dir.join("calibration.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serialises");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

pub fn read_calibration_summary(dir: &Path) -> Result<CalibrationSummary> {
    let path = dir.join("calibration.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path,
        reason: e.to_string(),
    })
}
