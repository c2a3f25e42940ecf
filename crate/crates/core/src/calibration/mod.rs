//! Gradient-flow calibrations `(ξ, B, ϑ, λ*)` of a smooth closed curve and
//! their numerical certification.
//!
//! The signed distance `s` is positive inside, so `∇s` is the inner normal
//! on the curve. `ξ = ζ(|s|)∇s` is the cut-off normal, `ϑ = −trunc(s)` the
//! transported weight and `B = h(s) v̄` the Stokes extension of the normal
//! velocity. Residuals are reported divided by `max(dist, h)`.

mod build;
mod distance;
mod io;
mod profiles;
mod stokes;
mod verify;

pub use build::{
    build_b, build_theta, build_xi, f_diag, lambda_star, radial_deviation, MAX_RADIAL_DEVIATION, VOLUME_FLUX_TOL,
};
pub use distance::{default_tube_radius, distance_at, max_tube_radius, signed_distance, ClosestPoint, SignedDistance};
pub use io::{read_calibration_summary, write_calibration, CalibrationSummary};
pub use profiles::{bump, truncate, zeta};
pub use stokes::{polar_coefficients, StokesDisc, FLUX_TOL, TAIL_WARN};
pub use verify::{verify_static, verify_transport, CalibrationResiduals, TransportResiduals};

use crate::error::{Error, Result};
use crate::fields::{PeriodicGrid, ScalarField, Spectral, VectorField};
use crate::sharpinterface::Curve;

#[derive(Clone, Debug)]
pub struct Calibration {
    pub xi: VectorField,
    /// Absent when no velocity was supplied or the curve is too far from a
    /// circle for the disc construction.
    pub b: Option<VectorField>,
    pub theta: ScalarField,
    pub lambda_star: f64,
    pub delta: f64,
    pub curve: Curve,
    pub t: f64,
    pub velocity: Option<Vec<f64>>,
    pub distance: SignedDistance,
    /// Spectral `div ξ`.
    pub div_xi: ScalarField,
    pub f_diag: Option<ScalarField>,
}

impl Calibration {
    /// Builds the calibration of `curve` at time `t`. `velocity` holds the
    /// normal speed at the nodes (along the inner normal); `delta` defaults
    /// to [`default_tube_radius`].
    pub fn build(
        spectral: &Spectral,
        curve: &Curve,
        velocity: Option<&[f64]>,
        delta: Option<f64>,
        t: f64,
    ) -> Result<Self> {
        let grid = *spectral.grid();
        let delta = delta.unwrap_or_else(|| default_tube_radius(curve, &grid));
        let distance = signed_distance(curve, &grid, delta)?;
        let xi = build_xi(&distance, delta);
        let theta = build_theta(&distance.s, delta);
        let div_xi = spectral.divergence(&xi)?;
        let lambda_star = build::lambda_star_from_div(curve, &div_xi);
        let b = match velocity {
            None => None,
            Some(v) => match build_b(curve, v, &distance, delta) {
                Ok(b) => Some(b),
                Err(Error::InvalidCurve(reason)) => {
                    log::info!("B omitted: {reason}");
                    None
                }
                Err(e) => return Err(e),
            },
        };
        let f_diag = b.as_ref().map(|b| f_diag(spectral, &distance, b, delta)).transpose()?;
        Ok(Self {
            xi,
            b,
            theta,
            lambda_star,
            delta,
            curve: curve.clone(),
            t,
            velocity: velocity.map(<[f64]>::to_vec),
            distance,
            div_xi,
            f_diag,
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.theta.grid()
    }

    /// `χ_𝒜 = 1_{s > 0}`.
    pub fn chi(&self) -> ScalarField {
        self.distance
            .s
            .map(|s| if s > 0.0 { 1.0 } else { 0.0 })
            .expect("indicator is finite")
    }
}
