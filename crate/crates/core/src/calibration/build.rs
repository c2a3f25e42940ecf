use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::profiles::{bump, truncate, zeta};
use super::stokes::{StokesDisc, TAIL_WARN};
use super::SignedDistance;
use crate::error::{Error, Result};
use crate::fields::{wrap_periodic, PeriodicGrid, ScalarField, Spectral, VectorField};
use crate::sharpinterface::Curve;

/// Largest `∮ V ds` accepted as volume preserving.
pub const VOLUME_FLUX_TOL: f64 = 1e-8;

/// Largest relative radial deviation from the equal-area circle for which
/// `B` is built by rescaling the disc solution.
pub const MAX_RADIAL_DEVIATION: f64 = 0.1;

/// `ξ = ζ(|s|) ∇s`, with `∇s` the normal at the closest point.
pub fn build_xi(dist: &SignedDistance, delta: f64) -> VectorField {
    let grid = *dist.s.grid();
    let (mut x, mut y) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for k in 0..grid.len() {
        let z = zeta(dist.s.values()[k].abs(), delta).0;
        let n = dist.normal.at(k);
        x.push(z * n[0]);
        y.push(z * n[1]);
    }
    VectorField::from_vecs_unchecked(grid, x, y)
}

/// `ϑ = −trunc(s)`: negative inside, positive outside.
pub fn build_theta(s: &ScalarField, delta: f64) -> ScalarField {
    let v = s.values().iter().map(|&r| -truncate(r, delta)).collect();
    ScalarField::from_vec_unchecked(*s.grid(), v)
}

/// Mean of `div ξ` over the curve, with the spectral divergence
/// interpolated to the nodes.
pub fn lambda_star(spectral: &Spectral, curve: &Curve, xi: &VectorField) -> Result<f64> {
    let div = spectral.divergence(xi)?;
    Ok(lambda_star_from_div(curve, &div))
}

pub(crate) fn lambda_star_from_div(curve: &Curve, div: &ScalarField) -> f64 {
    let sum: f64 = curve
        .points()
        .iter()
        .zip(curve.ds())
        .map(|(&p, &w)| div.interpolate(p) * w)
        .sum();
    sum / curve.length()
}

/// Area-equivalent radius `√(A/π)` and the largest relative deviation of
/// the node radii (about the centroid) from it.
pub fn radial_deviation(curve: &Curve) -> (f64, f64) {
    let c = curve.centroid();
    let r = (curve.area() / PI).sqrt();
    let dev = curve
        .points()
        .iter()
        .map(|p| ((p[0] - c[0]).hypot(p[1] - c[1]) - r).abs() / r)
        .fold(0.0, f64::max);
    (r, dev)
}

/// Polar coefficients of `g(θ) = V n` seen from the centroid, computed by
/// the trapezoid rule in the node parameter (spectrally accurate for smooth
/// star-shaped curves). Returns `n = −K..=K`.
fn boundary_coefficients(
    curve: &Curve,
    velocity: &[f64],
    center: [f64; 2],
    kmax: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let pts = curve.points();
    let n = pts.len();
    let mut theta = Vec::with_capacity(n);
    let mut prev = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let mut t = (p[1] - center[1]).atan2(p[0] - center[0]);
        if i > 0 {
            t = prev + wrap_periodic(t - prev, 2.0 * PI);
        }
        theta.push(t);
        prev = t;
    }
    // θ'(j) from the periodic part θ_j − 2πj/N.
    let mut per: Vec<Complex64> = theta
        .iter()
        .enumerate()
        .map(|(j, t)| Complex64::new(t - 2.0 * PI * j as f64 / n as f64, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut per);
    for (m, c) in per.iter_mut().enumerate() {
        let k = if m < n / 2 {
            m as f64
        } else if m == n / 2 {
            0.0
        } else {
            m as f64 - n as f64
        };
        *c *= Complex64::new(0.0, 2.0 * PI * k / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut per);
    let dtheta: Vec<f64> = per.iter().map(|c| 2.0 * PI / n as f64 + c.re / n as f64).collect();

    let size = 2 * kmax + 1;
    let (mut gr, mut gt) = (vec![Complex64::default(); size], vec![Complex64::default(); size]);
    for j in 0..n {
        let (s, c) = theta[j].sin_cos();
        let g = [velocity[j] * curve.normals()[j][0], velocity[j] * curve.normals()[j][1]];
        let r = g[0] * c + g[1] * s;
        let t = -g[0] * s + g[1] * c;
        let w = dtheta[j] / (2.0 * PI);
        let base = Complex64::new(c, -s);
        for idx in 0..size {
            let m = idx as i64 - kmax as i64;
            let e = if m >= 0 {
                base.powi(m as i32)
            } else {
                base.conj().powi((-m) as i32)
            };
            gr[idx] += e * (r * w);
            gt[idx] += e * (t * w);
        }
    }
    (gr, gt)
}

/// Extended velocity `B = h(s) v((x − c)/R)` with `v` the Stokes flow on the
/// unit disc whose boundary values are `V n` transported from the curve.
pub fn build_b(curve: &Curve, velocity: &[f64], dist: &SignedDistance, delta: f64) -> Result<VectorField> {
    if velocity.len() != curve.len() {
        return Err(Error::param(
            "velocity",
            format!("{} values for a curve with {} nodes", velocity.len(), curve.len()),
        ));
    }
    let flux: f64 = velocity.iter().zip(curve.ds()).map(|(v, w)| v * w).sum();
    if !(flux.abs() <= VOLUME_FLUX_TOL) {
        return Err(Error::IncompatibleFlux { flux });
    }
    let (radius, dev) = radial_deviation(curve);
    if dev >= MAX_RADIAL_DEVIATION {
        return Err(Error::InvalidCurve(format!(
            "radial deviation {dev:.3} from the equal-area circle exceeds {MAX_RADIAL_DEVIATION}"
        )));
    }
    let grid = *dist.s.grid();
    let center = curve.centroid();
    let kmax = (curve.len() / 4).min(48);
    let (mut gr, gt) = boundary_coefficients(curve, velocity, center, kmax);
    // The disc flux is zero up to the mapping error once ∮V ds vanishes.
    gr[kmax] = Complex64::new(0.0, gr[kmax].im);
    let disc = StokesDisc::solve(&gr, &gt)?;

    let side = grid.side();
    let (mut bx, mut by) = (vec![0.0; grid.len()], vec![0.0; grid.len()]);
    let mut reach: f64 = 1.0;
    for k in 0..grid.len() {
        let s = dist.s.values()[k];
        let (h, _) = bump(s, delta);
        if h == 0.0 {
            continue;
        }
        let x = grid.point_at(k);
        let y = [
            wrap_periodic(x[0] - center[0], side) / radius,
            wrap_periodic(x[1] - center[1], side) / radius,
        ];
        reach = reach.max(y[0].hypot(y[1]));
        let v = disc.velocity(y);
        bx[k] = h * v[0];
        by[k] = h * v[1];
    }
    let tail = disc.tail_norm(reach);
    if tail > TAIL_WARN {
        log::warn!("Stokes series tail {tail:.3e} at continuation radius {reach:.3}");
    }
    VectorField::new(grid, bx, by)
}

/// Bounded factor of the `ξ` transport identity, `h(s) ∇s·(∇B)∇s`.
pub fn f_diag(spectral: &Spectral, dist: &SignedDistance, b: &VectorField, delta: f64) -> Result<ScalarField> {
    let [gbx, gby] = spectral.jacobian(b)?;
    let grid: PeriodicGrid = *b.grid();
    let v = (0..grid.len())
        .map(|k| {
            let n = dist.normal.at(k);
            let (h, _) = bump(dist.s.values()[k], delta);
            let gx = gbx.at(k);
            let gy = gby.at(k);
            h * (n[0] * (gx[0] * n[0] + gx[1] * n[1]) + n[1] * (gy[0] * n[0] + gy[1] * n[1]))
        })
        .collect();
    ScalarField::new(grid, v)
}
