//! Comparison functionals between a diffuse interface and a calibrated
//! sharp one: relative entropy, bulk error and the coercivity inequalities
//! they control.
//!
//! The weak object is the phase-field proxy, whose directional measure is a
//! Dirac mass at `n_ε`. Its density with respect to the perimeter of the
//! phase is taken to be `ρ ≡ 1`, so the perimeter integrals are `ω_ε`
//! integrals and `∫(1 − ρ) dω` vanishes identically.

mod io;
mod monitor;

pub use io::{write_comparison_csv, write_violations, ViolationEntry};
pub use monitor::{stability_monitor, StabilitySummary, ENTROPY_FLOOR};

use serde::{Deserialize, Serialize};

use crate::calibration::{Calibration, CalibrationResiduals};
use crate::error::Result;
use crate::fields::{ScalarField, Spectral};
use crate::phasefield::VarifoldProxy;

/// Relative slack of the coercivity checks.
pub const COERCIVITY_SLACK: f64 = 1e-8;

/// Lower bound below which `E_rel` or `E_bulk` counts as negative.
pub const NEGATIVITY_TOL: f64 = 1e-10;

/// Names of the coercivity inequalities, in report order.
pub const INEQUALITIES: [&str; 8] = ["c1", "c2", "c4", "c5", "c5b", "c6", "c7a", "c7b"];

/// `(1 − p·ξ) − ½|p − ξ|² − ½(1 − |ξ|)`, nonnegative for unit `p` and
/// `|ξ| ≤ 1`.
pub fn kernel_gap(p: [f64; 2], xi: [f64; 2]) -> f64 {
    let dot = p[0] * xi[0] + p[1] * xi[1];
    let d = [p[0] - xi[0], p[1] - xi[1]];
    (1.0 - dot) - 0.5 * (d[0] * d[0] + d[1] * d[1]) - 0.5 * (1.0 - xi[0].hypot(xi[1]))
}

/// `χ_ε = 1_{u > 1/2}`.
pub fn phase_indicator(u: &ScalarField) -> ScalarField {
    u.map(|v| if v > 0.5 { 1.0 } else { 0.0 }).expect("indicator is finite")
}

/// Cell volume fractions of `{u > 1/2}` from the linear reconstruction
/// `u + ∇u·y` in each cell. Agrees with [`phase_indicator`] away from the
/// level set and integrates the indicator to second order across it.
pub fn phase_fraction(spectral: &Spectral, u: &ScalarField) -> Result<ScalarField> {
    let g = spectral.gradient(u)?;
    let h = u.grid().h();
    let v = (0..u.grid().len())
        .map(|k| {
            let [gx, gy] = g.at(k);
            let m = gx.hypot(gy);
            let d = u.values()[k] - 0.5;
            if m * h < 1e-12 {
                return if d > 0.0 { 1.0 } else { 0.0 };
            }
            square_fraction(d / m, gx / m, gy / m, h)
        })
        .collect();
    ScalarField::new(*u.grid(), v)
}

/// Cell volume fractions of `𝒜 = {s > 0}` from the signed distance and its
/// closest-point normal.
pub fn strong_fraction(cal: &Calibration) -> ScalarField {
    let h = cal.grid().h();
    let dist = &cal.distance;
    let v = dist
        .s
        .values()
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let n = dist.normal.at(k);
            square_fraction(s, n[0], n[1], h)
        })
        .collect();
    ScalarField::new(*cal.grid(), v).expect("fractions are finite")
}

/// `|{u > 1/2} Δ 𝒜|` from cell fractions.
pub fn symmetric_difference(fraction: &ScalarField, cal: &Calibration) -> Result<f64> {
    fraction.grid().ensure_same(cal.grid(), "symmetric difference")?;
    let strong = strong_fraction(cal);
    let sum: f64 = fraction
        .values()
        .iter()
        .zip(strong.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum * fraction.grid().cell_area())
}

/// Area fraction of the cell `[−h/2, h/2]²` where `n·y > −d`, for unit `n`.
fn square_fraction(d: f64, nx: f64, ny: f64, h: f64) -> f64 {
    let (a, b) = {
        let (p, q) = (0.5 * h * nx.abs(), 0.5 * h * ny.abs());
        (p.max(q), p.min(q))
    };
    // CDF at d of n·y, the sum of uniforms on [−a, a] and [−b, b].
    let t = d;
    if t <= -(a + b) {
        0.0
    } else if t >= a + b {
        1.0
    } else if b < 1e-12 * a {
        (t + a) / (2.0 * a)
    } else if t < b - a {
        (t + a + b).powi(2) / (8.0 * a * b)
    } else if t <= a - b {
        (t + a) / (2.0 * a)
    } else {
        1.0 - (a + b - t).powi(2) / (8.0 * a * b)
    }
}

/// `∫(1 − n_ε·ξ) ω_ε` and `∫ω_ε + ∫χ_ε div ξ`. Passing the cell fractions
/// of [`phase_fraction`] as `chi` removes the staircase error of the second
/// form.
pub fn relative_entropy(proxy: &VarifoldProxy, chi: &ScalarField, cal: &Calibration) -> Result<(f64, f64)> {
    let grid = *proxy.omega.grid();
    grid.ensure_same(cal.grid(), "relative entropy")?;
    grid.ensure_same(chi.grid(), "relative entropy")?;
    let (mut direct, mut mass, mut div) = (0.0, 0.0, 0.0);
    for k in 0..grid.len() {
        let o = proxy.omega.values()[k];
        let n = proxy.normal.at(k);
        let x = cal.xi.at(k);
        direct += (1.0 - n[0] * x[0] - n[1] * x[1]) * o;
        mass += o;
        div += chi.values()[k] * cal.div_xi.values()[k];
    }
    let da = grid.cell_area();
    Ok((direct * da, (mass + div) * da))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkError {
    /// `∫|χ − χ_𝒜||ϑ|`.
    pub modulus: f64,
    /// `∫(χ − χ_𝒜)ϑ`.
    pub signed: f64,
}

impl BulkError {
    /// The two forms agree whenever `χ ∈ [0, 1]` and `ϑ` has the right sign.
    pub fn consistent(&self) -> bool {
        (self.modulus - self.signed).abs() <= 1e-10 * self.modulus.abs().max(1.0)
    }
}

pub fn bulk_error(chi: &ScalarField, cal: &Calibration) -> Result<BulkError> {
    let grid = *chi.grid();
    grid.ensure_same(cal.grid(), "bulk error")?;
    let strong = cal.distance.s.values();
    let theta = cal.theta.values();
    let (mut m, mut s) = (0.0, 0.0);
    for k in 0..grid.len() {
        let diff = chi.values()[k] - if strong[k] > 0.0 { 1.0 } else { 0.0 };
        m += diff.abs() * theta[k].abs();
        s += diff * theta[k];
    }
    let da = grid.cell_area();
    Ok(BulkError {
        modulus: m * da,
        signed: s * da,
    })
}

/// Two sides of one coercivity inequality `lhs ≤ rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coercivity {
    pub lhs: f64,
    pub rhs: f64,
}

impl Coercivity {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + COERCIVITY_SLACK * self.rhs.abs() + f64::MIN_POSITIVE
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub t: f64,
    pub e_rel: f64,
    pub e_rel_alt: f64,
    pub e_bulk: f64,
    pub e_bulk_signed: f64,
    /// One entry per name in [`INEQUALITIES`].
    pub coercivity: Vec<Coercivity>,
    pub de_giorgi_residual: Option<f64>,
}

impl EntropyReport {
    /// Names of the failed inequalities, plus `negative_*` entries for
    /// negative functionals and `bulk_forms` when the bulk forms disagree.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v: Vec<&'static str> = INEQUALITIES
            .iter()
            .zip(&self.coercivity)
            .filter(|(_, c)| !c.holds())
            .map(|(n, _)| *n)
            .collect();
        if self.e_rel < -NEGATIVITY_TOL {
            v.push("negative_e_rel");
        }
        if self.e_bulk < -NEGATIVITY_TOL {
            v.push("negative_e_bulk");
        }
        let bulk = BulkError {
            modulus: self.e_bulk,
            signed: self.e_bulk_signed,
        };
        if !bulk.consistent() {
            v.push("bulk_forms");
        }
        v
    }

    pub fn total(&self) -> f64 {
        self.e_rel + self.e_bulk
    }
}

/// Evaluates the functionals and every coercivity inequality at time `t`.
/// `chi` is the indicator `1_{u>1/2}`; `fraction` its cell fractions, used
/// for `E_rel_alt`. The constants in `min(1, c d²)` and `min(1, c d)` are
/// the measured `c_short` and `c_theta` of `residuals`.
pub fn coercivity_report(
    t: f64,
    proxy: &VarifoldProxy,
    chi: &ScalarField,
    fraction: &ScalarField,
    cal: &Calibration,
    residuals: &CalibrationResiduals,
) -> Result<EntropyReport> {
    let (e_rel, e_rel_alt) = relative_entropy(proxy, fraction, cal)?;
    let bulk = bulk_error(chi, cal)?;
    let grid = *chi.grid();
    let da = grid.cell_area();
    let s = cal.distance.s.values();
    let (c_short, c_theta) = (residuals.c_short, residuals.c_theta);

    let (mut tilt, mut short, mut cut, mut len_gap, mut tilt_half) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..grid.len() {
        let o = proxy.omega.values()[k];
        let n = proxy.normal.at(k);
        let x = cal.xi.at(k);
        let d = s[k].abs();
        let dn = [n[0] - x[0], n[1] - x[1]];
        tilt += (dn[0] * dn[0] + dn[1] * dn[1]) * o;
        tilt_half += (1.0 - n[0] * x[0] - n[1] * x[1]) * o;
        short += (c_short * d * d).min(1.0) * o;
        len_gap += (1.0 - x[0].hypot(x[1])) * o;
        let strong = if s[k] > 0.0 { 1.0 } else { 0.0 };
        cut += (chi.values()[k] - strong).abs() * (c_theta * d).min(1.0);
    }
    let (tilt, tilt_half, short, len_gap, cut) = (tilt * da, tilt_half * da, short * da, len_gap * da, cut * da);
    let pair = |lhs, rhs| Coercivity { lhs, rhs };
    let coercivity = vec![
        pair(tilt, 2.0 * e_rel),
        pair(short, 2.0 * e_rel),
        pair(cut, bulk.modulus),
        // ∫(1 − ρ) dω with ρ ≡ 1.
        pair(0.0, e_rel),
        pair(tilt_half, e_rel),
        pair(tilt, 2.0 * e_rel),
        pair(short, len_gap),
        pair(len_gap, 2.0 * e_rel),
    ];
    Ok(EntropyReport {
        t,
        e_rel,
        e_rel_alt,
        e_bulk: bulk.modulus,
        e_bulk_signed: bulk.signed,
        coercivity,
        de_giorgi_residual: None,
    })
}

#[cfg(test)]
mod tests;
