//! Dirichlet Stokes flow on the unit disc by a stream-function series.
//!
//! With `v = ∇⊥ψ = (∂_y ψ, −∂_x ψ)` and
//! `ψ = Σ_n (a_n r^{|n|} + b_n r^{|n|+2}) e^{inθ}`, the velocity is exactly
//! solenoidal and `Δ²ψ = 0`. The pressure is the harmonic conjugate of
//! `Δψ`, `π = Re Σ i sgn(n) 4(|n|+1) b_n r^{|n|} e^{inθ}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Largest boundary flux accepted by [`StokesDisc::solve`].
pub const FLUX_TOL: f64 = 1e-10;

/// Tail contribution (relative) above which the continuation is reported.
pub const TAIL_WARN: f64 = 1e-10;

/// Coefficients below this fraction of the largest are round-off and are
/// dropped, since the continuation beyond `r = 1` amplifies them.
const PRUNE: f64 = 64.0 * f64::EPSILON;

#[derive(Clone, Debug)]
pub struct StokesDisc {
    kmax: usize,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

/// Polar Fourier coefficients `(ĝ_r, ĝ_θ)` of Cartesian boundary samples at
/// `θ_j = 2πj/M`, ordered `n = −K..=K` with `K = (M − 1)/2`.
pub fn polar_coefficients(samples: &[[f64; 2]]) -> (Vec<Complex64>, Vec<Complex64>) {
    let m = samples.len();
    let mut gr: Vec<Complex64> = Vec::with_capacity(m);
    let mut gt: Vec<Complex64> = Vec::with_capacity(m);
    for (j, g) in samples.iter().enumerate() {
        let (s, c) = (2.0 * PI * j as f64 / m as f64).sin_cos();
        gr.push(Complex64::new(g[0] * c + g[1] * s, 0.0));
        gt.push(Complex64::new(-g[0] * s + g[1] * c, 0.0));
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut gr);
    fft.process(&mut gt);
    let k = (m - 1) / 2;
    let pick = |v: &[Complex64]| -> Vec<Complex64> {
        (-(k as i64)..=k as i64)
            .map(|n| v[n.rem_euclid(m as i64) as usize] / m as f64)
            .collect()
    };
    (pick(&gr), pick(&gt))
}

impl StokesDisc {
    /// Solves for boundary data given by polar coefficients ordered
    /// `n = −K..=K`. Rejects data with net flux `2π Re ĝ_r(0)` above
    /// [`FLUX_TOL`].
    pub fn solve(radial: &[Complex64], angular: &[Complex64]) -> Result<Self> {
        if radial.len() != angular.len() || radial.len() % 2 == 0 {
            return Err(Error::param(
                "boundary_velocity",
                format!(
                    "coefficient lists of lengths {} and {} (need equal, odd)",
                    radial.len(),
                    angular.len()
                ),
            ));
        }
        let kmax = radial.len() / 2;
        let flux = 2.0 * PI * radial[kmax].re;
        if !(flux.abs() <= FLUX_TOL) {
            return Err(Error::IncompatibleFlux { flux });
        }
        let mut a = vec![Complex64::default(); radial.len()];
        let mut b = vec![Complex64::default(); radial.len()];
        for idx in 0..radial.len() {
            let n = idx as i64 - kmax as i64;
            if n == 0 {
                b[idx] = -angular[idx] / 2.0;
                continue;
            }
            let an = n.unsigned_abs() as f64;
            let c = radial[idx] / Complex64::new(0.0, n as f64);
            b[idx] = (-angular[idx] - an * c) / 2.0;
            a[idx] = c - b[idx];
        }
        let big = a.iter().chain(&b).fold(0.0_f64, |m, c| m.max(c.norm()));
        for c in a.iter_mut().chain(b.iter_mut()) {
            if c.norm() <= PRUNE * big {
                *c = Complex64::default();
            }
        }
        Ok(Self { kmax, a, b })
    }

    /// Solves for Cartesian boundary samples at equispaced angles.
    pub fn from_samples(samples: &[[f64; 2]]) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::param("boundary_velocity", "need at least 3 samples"));
        }
        let (gr, gt) = polar_coefficients(samples);
        Self::solve(&gr, &gt)
    }

    pub fn max_mode(&self) -> usize {
        self.kmax
    }

    /// Size of the highest quarter of the modes when continued to radius
    /// `rho`, relative to the full coefficient mass there.
    pub fn tail_norm(&self, rho: f64) -> f64 {
        let cut = self.kmax - self.kmax / 4;
        let (mut tail, mut total) = (0.0, 0.0);
        for idx in 0..self.a.len() {
            let n = (idx as i64 - self.kmax as i64).unsigned_abs() as usize;
            let w = (self.a[idx].norm() + self.b[idx].norm()) * rho.powi(n as i32 + 2) * (n as f64 + 2.0);
            total += w;
            if n > cut {
                tail += w;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Velocity at `p` (disc coordinates); valid for `|p| ≤ 1` and, as an
    /// analytic continuation, slightly beyond.
    pub fn velocity(&self, p: [f64; 2]) -> [f64; 2] {
        let r = p[0].hypot(p[1]);
        let (cos, sin) = if r > 0.0 { (p[0] / r, p[1] / r) } else { (1.0, 0.0) };
        let e = Complex64::new(cos, sin);
        let (mut vr, mut vt) = (Complex64::default(), Complex64::default());
        for idx in 0..self.a.len() {
            let n = idx as i64 - self.kmax as i64;
            let an = n.unsigned_abs() as i32;
            let phase = if n >= 0 { e.powi(an) } else { e.conj().powi(an) };
            // r^{|n|-1} is only needed with a factor that vanishes at n = 0.
            let rm = if an == 0 { 0.0 } else { r.powi(an - 1) };
            let rp = r.powi(an + 1);
            let nf = n as f64;
            vr += Complex64::new(0.0, nf) * (self.a[idx] * rm + self.b[idx] * rp) * phase;
            vt -= (self.a[idx] * (an as f64 * rm) + self.b[idx] * ((an + 2) as f64 * rp)) * phase;
        }
        let (vr, vt) = (vr.re, vt.re);
        [vr * cos - vt * sin, vr * sin + vt * cos]
    }

    /// Pressure at `p`, normalised to vanish at the origin.
    pub fn pressure(&self, p: [f64; 2]) -> f64 {
        let r = p[0].hypot(p[1]);
        let e = if r > 0.0 {
            Complex64::new(p[0] / r, p[1] / r)
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut acc = Complex64::default();
        for idx in 0..self.a.len() {
            let n = idx as i64 - self.kmax as i64;
            if n == 0 {
                continue;
            }
            let an = n.unsigned_abs() as i32;
            let phase = if n > 0 { e.powi(an) } else { e.conj().powi(an) };
            let sg = if n > 0 { 1.0 } else { -1.0 };
            acc += Complex64::new(0.0, sg * 4.0 * (an + 1) as f64) * self.b[idx] * r.powi(an) * phase;
        }
        acc.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(m: usize, g: impl Fn(f64) -> [f64; 2]) -> Vec<[f64; 2]> {
        (0..m).map(|j| g(2.0 * PI * j as f64 / m as f64)).collect()
    }

    fn probe_points() -> Vec<[f64; 2]> {
        let mut v = vec![[0.0, 0.0]];
        for k in 0..40 {
            let r = 1.2 * (k % 8) as f64 / 7.0;
            let t = 0.7 + 0.37 * k as f64;
            v.push([r * t.cos(), r * t.sin()]);
        }
        v
    }

    #[test]
    fn zero_data_gives_rest() {
        let s = StokesDisc::from_samples(&vec![[0.0, 0.0]; 32]).unwrap();
        for p in probe_points() {
            assert_eq!(s.velocity(p), [0.0, 0.0]);
            assert_eq!(s.pressure(p), 0.0);
        }
    }

    #[test]
    fn rigid_rotation_is_exact() {
        let omega = 1.7;
        let s = StokesDisc::from_samples(&samples(32, |t| [-omega * t.sin(), omega * t.cos()])).unwrap();
        for p in probe_points() {
            let v = s.velocity(p);
            assert!(
                (v[0] + omega * p[1]).abs() < 1e-13 && (v[1] - omega * p[0]).abs() < 1e-13,
                "{p:?}: {v:?}"
            );
            assert!(s.pressure(p).abs() < 1e-12);
        }
    }

    #[test]
    fn outflow_is_rejected_with_its_flux() {
        match StokesDisc::from_samples(&samples(64, |t| [t.cos(), t.sin()])) {
            Err(Error::IncompatibleFlux { flux }) => assert!((flux - 2.0 * PI).abs() < 1e-12),
            other => panic!("expected flux error, got {other:?}"),
        }
    }

    fn quadrupole() -> StokesDisc {
        // Inner-normal velocity cos 2θ · (−e_r), plus a mild swirl.
        StokesDisc::from_samples(&samples(64, |t| {
            let v = (2.0 * t).cos();
            let w = 0.3 * (3.0 * t).sin();
            [-v * t.cos() - w * t.sin(), -v * t.sin() + w * t.cos()]
        }))
        .unwrap()
    }

    #[test]
    fn boundary_data_is_attained() {
        let s = quadrupole();
        for k in 0..50 {
            let t = 0.1 + 2.0 * PI * k as f64 / 50.0;
            let v = s.velocity([t.cos(), t.sin()]);
            let want = (2.0 * t).cos();
            let w = 0.3 * (3.0 * t).sin();
            let g = [-want * t.cos() - w * t.sin(), -want * t.sin() + w * t.cos()];
            assert!((v[0] - g[0]).abs() < 1e-13 && (v[1] - g[1]).abs() < 1e-13);
        }
    }

    #[test]
    fn solenoidal_and_balanced() {
        let s = quadrupole();
        let e = 1e-3;
        // Fourth-order central differences.
        let d = |p: [f64; 2], ax: usize, f: &dyn Fn([f64; 2]) -> f64| {
            let at = |m: f64| {
                let mut q = p;
                q[ax] += m * e;
                f(q)
            };
            (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * e)
        };
        for p in probe_points().into_iter().filter(|p| p[0].hypot(p[1]) > 0.05) {
            let vx = |q: [f64; 2]| s.velocity(q)[0];
            let vy = |q: [f64; 2]| s.velocity(q)[1];
            let div = d(p, 0, &vx) + d(p, 1, &vy);
            assert!(div.abs() < 1e-8, "div {div} at {p:?}");
            // −Δv + ∇π = 0 by five-point differences.
            for (comp, ax) in [(&vx as &dyn Fn([f64; 2]) -> f64, 0usize), (&vy, 1)] {
                let c = comp(p);
                let mut lap = -4.0 * c;
                for (dx, dy) in [(e, 0.0), (-e, 0.0), (0.0, e), (0.0, -e)] {
                    lap += comp([p[0] + dx, p[1] + dy]);
                }
                lap /= e * e;
                let gp = d(p, ax, &|q| s.pressure(q));
                assert!(
                    (-lap + gp).abs() < 1e-4 * (1.0 + gp.abs()),
                    "momentum {} at {p:?}",
                    -lap + gp
                );
            }
        }
    }

    #[test]
    fn tail_is_small_for_smooth_data() {
        assert!(quadrupole().tail_norm(1.5) < TAIL_WARN);
    }
}
