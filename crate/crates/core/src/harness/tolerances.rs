use serde::{Deserialize, Serialize};

use crate::entropy::{COERCIVITY_SLACK, ENTROPY_FLOOR, NEGATIVITY_TOL};

/// Every tolerance the harness and the acceptance suite test against.
/// Bump `version` whenever a value changes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub version: u32,
    /// Default phase-field step `dt = dt_factor · ε²`.
    pub dt_factor: f64,
    /// Allowed per-step increase of `E_total`, relative to `E_total(0)`.
    pub energy_slack: f64,
    /// Factor on `√2 ε^{α/2} √E₀` in the volume-drift check.
    pub drift_factor: f64,
    /// `τ_disc = tau_disc_factor · E_S(0) / side²`.
    pub tau_disc_factor: f64,
    /// Cumulative De Giorgi residual, relative to `E_total(0)`.
    pub de_giorgi_rel: f64,
    /// Front tracker: De Giorgi equality, relative to the perimeter drop.
    pub strong_de_giorgi_rel: f64,
    /// Front tracker: relative area drift in projected mode.
    pub strong_area_projected: f64,
    /// Front tracker: relative area drift in analytic mode.
    pub strong_area_analytic: f64,
    /// Front tracker: allowed perimeter increase per step, relative to `L(0)`.
    pub perimeter_slack: f64,
    /// `max |B·ξ + div ξ − λ*|` on a stationary interface.
    pub geometric_interface: f64,
    /// Slack of `min(1, s²) ≤ 1 − |ξ|`.
    pub shortness_slack: f64,
    pub coercivity_slack: f64,
    pub negativity: f64,
    pub entropy_floor: f64,
}

pub const DEFAULT_TOLERANCES: Tolerances = Tolerances {
    version: 1,
    dt_factor: 0.25,
    energy_slack: 1e-8,
    drift_factor: 2.0,
    tau_disc_factor: 0.05,
    de_giorgi_rel: 1e-4,
    strong_de_giorgi_rel: 1e-4,
    strong_area_projected: 1e-10,
    strong_area_analytic: 1e-5,
    perimeter_slack: 1e-10,
    geometric_interface: 5e-2,
    shortness_slack: 1e-12,
    coercivity_slack: COERCIVITY_SLACK,
    negativity: NEGATIVITY_TOL,
    entropy_floor: ENTROPY_FLOOR,
};

impl Default for Tolerances {
    fn default() -> Self {
        DEFAULT_TOLERANCES
    }
}

/// `√2 ε^{α/2} √E₀`.
pub fn drift_bound(eps: f64, alpha: f64, e0: f64) -> f64 {
    std::f64::consts::SQRT_2 * eps.powf(0.5 * alpha) * e0.max(0.0).sqrt()
}

/// One pass/fail invariant with the measured value and its bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    /// `value ≤ bound`, failing on NaN.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }
}
