//! Nonlocal Allen–Cahn flow with a relaxed volume penalty:
//! `ε ∂ₜu = εΔu − W′(u)/ε + λ_ε √(2W(u))`, `λ_ε = ε^{−α}(m₀ − ∫φ(u))`.

mod ledger;
mod solver;

use serde::{Deserialize, Serialize};

use crate::calibration::distance_at;
use crate::doublewell::{optimal_profile, phi, sqrt_2w, w};
use crate::error::{Error, Result};
use crate::fields::{wrap_periodic, PeriodicGrid, ScalarField, Spectral, VectorField};
use crate::sharpinterface::Curve;

pub use ledger::{EnergyLedger, EnergyRecord};
pub use solver::{PhaseFieldSolver, StepStats, C_STAB};

/// Minimum number of cells per unit of `ε`.
pub const MIN_CELLS_PER_EPS: f64 = 3.0;

/// Degeneracy threshold for `|∇ψ|` and `√(2W)`.
pub const DEGENERATE: f64 = 1e-14;

/// How `λ_ε` enters a time step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseLambdaMode {
    /// `λ_ε` frozen at its value at the start of the step.
    #[default]
    Lagged,
    /// `λ_ε` evaluated at the end of the step, solved together with `u`.
    Projected,
}

#[derive(Clone, Debug)]
pub struct PhaseFieldState {
    pub u: ScalarField,
    pub t: f64,
    pub eps: f64,
    pub alpha: f64,
    /// Reference mass `∫φ(u₀)`, fixed at the initial time.
    pub m0: f64,
}

fn check_params(grid: &PeriodicGrid, eps: f64, alpha: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", format!("{eps} must be positive")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("{alpha} must lie in (0, 1)")));
    }
    let cells = eps / grid.h();
    if cells < MIN_CELLS_PER_EPS {
        return Err(Error::param(
            "eps",
            format!(
                "eps = {eps} is under-resolved: eps/h = {cells:.3} < {MIN_CELLS_PER_EPS} on h = {}",
                grid.h()
            ),
        ));
    }
    Ok(())
}

impl PhaseFieldState {
    /// State at `t = 0` with `m₀ = ∫φ(u)`.
    pub fn new(u: ScalarField, eps: f64, alpha: f64) -> Result<Self> {
        check_params(u.grid(), eps, alpha)?;
        let m0 = mass(&u);
        Ok(Self {
            u,
            t: 0.0,
            eps,
            alpha,
            m0,
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.u.grid()
    }

    /// `λ_ε = ε^{−α}(m₀ − ∫φ(u))`.
    pub fn lambda_eps(&self) -> f64 {
        (self.m0 - mass(&self.u)) / self.eps.powf(self.alpha)
    }

    pub fn mass_phi(&self) -> f64 {
        mass(&self.u)
    }

    /// Phase indicator `1_{u > 1/2}`.
    pub fn chi(&self) -> ScalarField {
        self.u
            .map(|v| if v > 0.5 { 1.0 } else { 0.0 })
            .expect("indicator is finite")
    }
}

pub(crate) fn mass(u: &ScalarField) -> f64 {
    u.grid().cell_area() * u.values().iter().map(|&v| phi(v)).sum::<f64>()
}

/// `u₀ = q(d/ε)` with `d` the signed distance to `interface`, positive inside.
pub fn init_well_prepared(grid: PeriodicGrid, interface: &Curve, eps: f64, alpha: f64) -> Result<PhaseFieldState> {
    check_params(&grid, eps, alpha)?;
    let spline = interface.spline()?;
    let values = grid
        .points()
        .map(|x| optimal_profile(distance_at(interface, &spline, x, grid.side()).s / eps))
        .collect();
    PhaseFieldState::new(ScalarField::new(grid, values)?, eps, alpha)
}

/// Two straight interfaces at `y = lo` and `y = hi`, with `u ≈ 1` between them.
pub fn init_strip(grid: PeriodicGrid, lo: f64, hi: f64, eps: f64, alpha: f64) -> Result<PhaseFieldState> {
    check_params(&grid, eps, alpha)?;
    let side = grid.side();
    if !(lo < hi && hi - lo < side) {
        return Err(Error::param(
            "strip",
            format!("need lo < hi < lo + side, got [{lo}, {hi}]"),
        ));
    }
    let c = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let u = ScalarField::from_fn(grid, |_, y| {
        optimal_profile((half - wrap_periodic(y - c, side).abs()) / eps)
    })?;
    PhaseFieldState::new(u, eps, alpha)
}

/// Modica–Mortola energy `E_S` and penalty `E_P` of a state.
pub fn energies(spectral: &Spectral, state: &PhaseFieldState) -> Result<(f64, f64)> {
    let g = spectral.gradient(&state.u)?;
    let eps = state.eps;
    let da = state.grid().cell_area();
    let es = da
        * state
            .u
            .values()
            .iter()
            .zip(g.x().iter().zip(g.y()))
            .map(|(&u, (gx, gy))| 0.5 * eps * (gx * gx + gy * gy) + w(u) / eps)
            .sum::<f64>();
    let ep = (state.m0 - state.mass_phi()).powi(2) / (2.0 * eps.powf(state.alpha));
    Ok((es, ep))
}

/// Pointwise discrepancy `ε/2 |∇u|² − W(u)/ε`.
pub fn discrepancy_field(spectral: &Spectral, state: &PhaseFieldState) -> Result<ScalarField> {
    let g = spectral.gradient(&state.u)?;
    let eps = state.eps;
    let vals = state
        .u
        .values()
        .iter()
        .enumerate()
        .map(|(k, &u)| {
            let [gx, gy] = g.at(k);
            0.5 * eps * (gx * gx + gy * gy) - w(u) / eps
        })
        .collect();
    ScalarField::new(*state.grid(), vals)
}

/// Diffuse surrogate of the interface as a measure with Dirac direction.
#[derive(Clone, Debug)]
pub struct VarifoldProxy {
    /// `ω = |∇φ(u)|`.
    pub omega: ScalarField,
    /// `∇φ(u)/|∇φ(u)|`, `e₁` where the gradient degenerates.
    pub normal: VectorField,
    /// `V = −rhs/√(2W(u))`, zero where `√(2W)` degenerates.
    pub velocity: ScalarField,
    /// `H = −(εΔu − W′(u)/ε) n`.
    pub curvature: VectorField,
    /// `∇φ(u) = √(2W(u)) ∇u`.
    pub grad_psi: VectorField,
    pub lambda: f64,
}

/// Builds the proxy from the state and the right-hand side cached by the
/// solver (`rhs = εΔu − W′/ε + λ√(2W)`).
pub fn varifold_proxy(spectral: &Spectral, state: &PhaseFieldState, rhs: &ScalarField) -> Result<VarifoldProxy> {
    let grid = *state.grid();
    grid.ensure_same(rhs.grid(), "varifold proxy")?;
    let g = spectral.gradient(&state.u)?;
    let lambda = state.lambda_eps();
    let m = grid.len();
    let (mut om, mut nx, mut ny) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
    let (mut vel, mut hx, mut hy) = (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
    let (mut px, mut py) = (Vec::with_capacity(m), Vec::with_capacity(m));
    for k in 0..m {
        let u = state.u.values()[k];
        let s2w = sqrt_2w(u);
        let [gx, gy] = g.at(k);
        let (qx, qy) = (s2w * gx, s2w * gy);
        let o = qx.hypot(qy);
        let nrm = if o < DEGENERATE { [1.0, 0.0] } else { [qx / o, qy / o] };
        let r = rhs.values()[k];
        om.push(o);
        px.push(qx);
        py.push(qy);
        nx.push(nrm[0]);
        ny.push(nrm[1]);
        vel.push(if s2w < DEGENERATE { 0.0 } else { -r / s2w });
        // εΔu − W′/ε = rhs − λ√(2W).
        let mc = -(r - lambda * s2w);
        hx.push(mc * nrm[0]);
        hy.push(mc * nrm[1]);
    }
    Ok(VarifoldProxy {
        omega: ScalarField::from_vec_unchecked(grid, om),
        normal: VectorField::from_vecs_unchecked(grid, nx, ny),
        velocity: ScalarField::from_vec_unchecked(grid, vel),
        curvature: VectorField::from_vecs_unchecked(grid, hx, hy),
        grad_psi: VectorField::from_vecs_unchecked(grid, px, py),
        lambda,
    })
}
