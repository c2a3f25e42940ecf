//! Backward-Euler time stepping.
//!
//! Each step minimises the incremental functional
//! `Φ(v) = E_S(v) + P(v) + ε/(2dt) ∫(v − u)²`, where `P(v) = −λ ∫φ(v)` with
//! the lagged multiplier, or `P = E_P` in projected mode. Its critical point
//! is the implicit update `ε(v − u)/dt = εΔv − W′(v)/ε + Λ √(2W(v))`.
//! The minimisation uses truncated Newton–CG, preconditioned by the
//! constant-coefficient part of the Hessian (diagonal in Fourier space), with
//! an Armijo line search on `Φ`.

use num_complex::Complex64;

use super::{PhaseFieldState, PhaseLambdaMode};
use crate::doublewell::{phi, sqrt_2w, w, w_prime};
use crate::error::{Error, Result};
use crate::fields::{PeriodicGrid, ScalarField, Spectral};

/// Step restriction `dt ≤ C_STAB · ε²`.
pub const C_STAB: f64 = 0.5;

/// Preconditioner shift: curvature of `W` at the wells.
const WELL_CURVATURE: f64 = 36.0;
const MAX_NEWTON: usize = 60;
const MAX_CG: usize = 200;
const FULL_STEP_BELOW: f64 = 1e-6;

/// Iteration counts of the last step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub newton: usize,
    pub cg: usize,
    pub residual: f64,
}

#[derive(Debug)]
pub struct PhaseFieldSolver {
    spectral: Spectral,
    mode: PhaseLambdaMode,
    /// Newton stops when `max|F| · dt/ε` (the implied correction) drops below this.
    tol: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Derivative of `√(2W(s)) = 6|s(s − 1)|`.
fn sqrt_2w_prime(s: f64) -> f64 {
    let sign = if s * (s - 1.0) >= 0.0 { 1.0 } else { -1.0 };
    6.0 * sign * (2.0 * s - 1.0)
}

/// Curvature of `W`.
fn w_second(s: f64) -> f64 {
    36.0 * (6.0 * s * s - 6.0 * s + 1.0)
}

struct StepProblem<'a> {
    u: &'a [f64],
    eps: f64,
    a0: f64,
    lam: f64,
    /// `ε^{−α}` in projected mode, `None` when λ is lagged.
    penalty: Option<f64>,
    m0: f64,
    da: f64,
}

impl PhaseFieldSolver {
    pub fn new(grid: PeriodicGrid) -> Self {
        Self {
            spectral: Spectral::new(grid),
            mode: PhaseLambdaMode::Lagged,
            tol: 1e-11,
        }
    }

    pub fn with_mode(mut self, mode: PhaseLambdaMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> PhaseLambdaMode {
        self.mode
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.spectral.grid()
    }

    /// `εΔu − W′(u)/ε + λ_ε √(2W(u))` with `λ_ε` of the state itself.
    pub fn rhs(&self, state: &PhaseFieldState) -> Result<ScalarField> {
        let lap = self.spectral.laplacian(&state.u)?;
        let eps = state.eps;
        let lam = state.lambda_eps();
        state
            .u
            .zip_map(&lap, |u, l| eps * l - w_prime(u) / eps + lam * sqrt_2w(u))
    }

    fn laplacian_of(&self, v: &[f64]) -> (Vec<f64>, f64) {
        let hat = self.spectral.forward_slice(v);
        let n = self.grid().n();
        let mut grad2 = 0.0;
        let mut out = Vec::with_capacity(hat.len());
        for j in 0..n {
            for i in 0..n {
                let k2 = self.spectral.k2(i, j);
                let c = hat[j * n + i];
                grad2 += k2 * c.norm_sqr();
                out.push(c * -k2);
            }
        }
        // Parseval: h² Σ|∇v|² = h²/n² Σ k²|v̂|².
        let grad2 = grad2 * self.grid().cell_area() / self.grid().len() as f64;
        (self.spectral.inverse_real(out), grad2)
    }

    fn dirichlet(&self, v: &[f64]) -> f64 {
        let hat = self.spectral.forward_slice(v);
        let n = self.grid().n();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += self.spectral.k2(i, j) * hat[j * n + i].norm_sqr();
            }
        }
        s * self.grid().cell_area() / self.grid().len() as f64
    }

    fn objective(&self, p: &StepProblem<'_>, v: &[f64], grad2: f64) -> f64 {
        let mut local = 0.0;
        let mut m = 0.0;
        for (&vi, &ui) in v.iter().zip(p.u) {
            local += w(vi) / p.eps + 0.5 * p.a0 * (vi - ui) * (vi - ui);
            m += phi(vi);
        }
        let m = m * p.da;
        let pen = match p.penalty {
            Some(c) => 0.5 * c * (p.m0 - m).powi(2),
            None => -p.lam * m,
        };
        0.5 * p.eps * grad2 + local * p.da + pen
    }

    /// Applies `(c0 − εΔ)^{-1}`.
    fn precondition(&self, r: &[f64], c0: f64, eps: f64) -> Vec<f64> {
        let n = self.grid().n();
        let hat = self.spectral.forward_slice(r);
        let mut out = Vec::with_capacity(hat.len());
        for j in 0..n {
            for i in 0..n {
                out.push(hat[j * n + i] * Complex64::new(1.0 / (c0 + eps * self.spectral.k2(i, j)), 0.0));
            }
        }
        self.spectral.inverse_real(out)
    }

    /// One backward-Euler step of size `dt`.
    pub fn step(&self, state: &PhaseFieldState, dt: f64) -> Result<PhaseFieldState> {
        self.step_with_stats(state, dt).map(|(s, _)| s)
    }

    pub fn step_with_stats(&self, state: &PhaseFieldState, dt: f64) -> Result<(PhaseFieldState, StepStats)> {
        self.grid().ensure_same(state.grid(), "phase-field step")?;
        let eps = state.eps;
        let bound = C_STAB * eps * eps;
        if !(dt > 0.0 && dt <= bound * (1.0 + 1e-12)) {
            return Err(Error::TimeStep { dt, bound });
        }
        let u = state.u.values();
        let m = u.len();
        let penalty = match self.mode {
            PhaseLambdaMode::Lagged => None,
            PhaseLambdaMode::Projected => Some(eps.powf(-state.alpha)),
        };
        let p = StepProblem {
            u,
            eps,
            a0: eps / dt,
            lam: state.lambda_eps(),
            penalty,
            m0: state.m0,
            da: state.grid().cell_area(),
        };
        let c0 = p.a0 + WELL_CURVATURE / eps;
        let mut v = u.to_vec();
        let mut stats = StepStats::default();
        let (mut lap, mut grad2) = self.laplacian_of(&v);
        let mut phi_v = self.objective(&p, &v, grad2);
        loop {
            let lam_v = match p.penalty {
                Some(c) => c * (p.m0 - mass_slice(&v, p.da)),
                None => p.lam,
            };
            let f: Vec<f64> = (0..m)
                .map(|k| p.a0 * (v[k] - u[k]) - eps * lap[k] + w_prime(v[k]) / eps - lam_v * sqrt_2w(v[k]))
                .collect();
            let fmax = f.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            stats.residual = fmax / p.a0;
            if !stats.residual.is_finite() {
                return Err(Error::Diverged {
                    t: state.t + dt,
                    reason: "non-finite residual in implicit solve".into(),
                });
            }
            if stats.residual <= self.tol {
                break;
            }
            if stats.newton == MAX_NEWTON {
                return Err(Error::Diverged {
                    t: state.t + dt,
                    reason: format!("Newton did not converge, correction {:.3e}", stats.residual),
                });
            }
            stats.newton += 1;
            let diag: Vec<f64> = v
                .iter()
                .map(|&x| p.a0 + w_second(x) / eps - lam_v * sqrt_2w_prime(x) - c0)
                .collect();
            let g: Option<Vec<f64>> = p.penalty.map(|_| v.iter().map(|&x| sqrt_2w(x)).collect());
            let apply = |x: &[f64], px: &[f64]| -> Vec<f64> {
                let mut out: Vec<f64> = (0..m).map(|k| diag[k] * x[k] + px[k]).collect();
                if let (Some(g), Some(c)) = (&g, p.penalty) {
                    let s = c * p.da * dot(g, x);
                    for k in 0..m {
                        out[k] += s * g[k];
                    }
                }
                out
            };
            let b: Vec<f64> = f.iter().map(|x| -x).collect();
            let eta = (0.1_f64).min((stats.residual).sqrt()).max(1e-6);
            let (delta, its) = self.pcg(&b, c0, eps, eta, apply);
            stats.cg += its;
            if stats.residual < FULL_STEP_BELOW {
                // Quadratic convergence regime; Φ differences are at round-off.
                for (a, d) in v.iter_mut().zip(&delta) {
                    *a += d;
                }
            } else {
                let slope = -dot(&f, &delta) * p.da;
                let mut t = 1.0;
                loop {
                    let trial: Vec<f64> = v.iter().zip(&delta).map(|(a, d)| a + t * d).collect();
                    let val = self.objective(&p, &trial, self.dirichlet(&trial));
                    if val <= phi_v - 1e-4 * t * slope {
                        v = trial;
                        break;
                    }
                    t *= 0.5;
                    if t < 1e-12 {
                        return Err(Error::Diverged {
                            t: state.t + dt,
                            reason: format!("line search failed, correction {:.3e}", stats.residual),
                        });
                    }
                }
            }
            let (l, g2) = self.laplacian_of(&v);
            lap = l;
            grad2 = g2;
            phi_v = self.objective(&p, &v, grad2);
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged {
                t: state.t + dt,
                reason: "non-finite phase field".into(),
            });
        }
        let next = PhaseFieldState {
            u: ScalarField::from_vec_unchecked(*state.grid(), v),
            t: state.t + dt,
            eps,
            alpha: state.alpha,
            m0: state.m0,
        };
        Ok((next, stats))
    }

    /// Preconditioned CG for `J x = b`, `J = (c0 − εΔ) + apply-part`. Stops at
    /// relative residual `eta` or on negative curvature.
    fn pcg(
        &self,
        b: &[f64],
        c0: f64,
        eps: f64,
        eta: f64,
        apply: impl Fn(&[f64], &[f64]) -> Vec<f64>,
    ) -> (Vec<f64>, usize) {
        let m = b.len();
        let mut x = vec![0.0; m];
        let mut r = b.to_vec();
        let mut z = self.precondition(&r, c0, eps);
        let mut p = z.clone();
        // P p, maintained by recursion so each iteration needs one transform.
        let mut pp = r.clone();
        let mut rz = dot(&r, &z);
        let bnorm = dot(b, b).sqrt();
        for it in 0..MAX_CG {
            let jp = apply(&p, &pp);
            let curv = dot(&p, &jp);
            if curv <= 0.0 {
                if it == 0 {
                    return (z, 1);
                }
                return (x, it);
            }
            let a = rz / curv;
            for k in 0..m {
                x[k] += a * p[k];
                r[k] -= a * jp[k];
            }
            if dot(&r, &r).sqrt() <= eta * bnorm {
                return (x, it + 1);
            }
            z = self.precondition(&r, c0, eps);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..m {
                p[k] = z[k] + beta * p[k];
                pp[k] = r[k] + beta * pp[k];
            }
        }
        (x, MAX_CG)
    }
}

fn mass_slice(v: &[f64], da: f64) -> f64 {
    da * v.iter().map(|&x| phi(x)).sum::<f64>()
}
