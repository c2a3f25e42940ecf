use serde::{Deserialize, Serialize};

use super::Calibration;
use crate::error::{Error, Result};
use crate::fields::Spectral;

/// Dist-normalised maxima over the tube `|s| < δ`, plus the pointwise
/// inequality checks on the whole grid. `None` marks a property that could
/// not be evaluated (no `B`, or no second time level).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResiduals {
    pub div_b: Option<f64>,
    pub tangential_b: Option<f64>,
    /// `|B·ξ + div ξ − λ*| / max(dist, h)`.
    pub geometric: f64,
    /// Same, minus the defect `V − κ − λ*` of the supplied velocity carried
    /// along normals; vanishes to `O(dist)` for any velocity.
    pub geometric_forced: Option<f64>,
    /// `max |B·ξ + div ξ − λ*|` at the curve nodes (not normalised).
    pub geometric_interface: f64,
    pub theta_transport: Option<f64>,
    pub xi_len_transport: Option<f64>,
    pub xi_transport: Option<f64>,
    pub f_sup: Option<f64>,
    /// `max (min(1, s²) − (1 − |ξ|))`; must be `≤ 0`.
    pub shortness_slack: f64,
    /// Largest `c` with `min(1, c s²) ≤ 1 − |ξ|`, measured.
    pub c_short: f64,
    /// Sign violations of `ϑ` plus violations of its lower bound.
    pub theta_coercivity: usize,
    /// Measured `c` and `C_ϑ` with `min(1, c d) ≤ |ϑ| ≤ C_ϑ min(1, c d)`.
    pub c_theta: f64,
    pub big_c_theta: f64,
    /// Range of `|ϑ| / min(δ, d)`.
    pub theta_ratio: [f64; 2],
    /// `max |ξ|`; must not exceed 1.
    pub xi_max: f64,
    /// Grid points where `B ≠ 0` but `ξ = 0`.
    pub support_violations: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransportResiduals {
    /// `|∂ₜϑ + B·∇ϑ| / max(d, h)`.
    pub theta_transport: f64,
    /// `|∂ₜ|ξ|² + B·∇|ξ|²| / max(d, h)²`.
    pub xi_len_transport: f64,
    /// `|∂ₜξ + (B·∇)ξ + (∇B)ᵀξ − f ξ| / max(d, h)` with `f = f_diag`.
    pub xi_transport: f64,
    /// `sup |f_diag|`.
    pub f_sup: f64,
    /// Largest gap between `f_diag` and the measured `ξ·(…)/|ξ|²` where
    /// `|ξ| ≥ 1/2`.
    pub f_crosscheck: f64,
}

impl CalibrationResiduals {
    pub fn with_transport(mut self, t: &TransportResiduals) -> Self {
        self.theta_transport = Some(t.theta_transport);
        self.xi_len_transport = Some(t.xi_len_transport);
        self.xi_transport = Some(t.xi_transport);
        self.f_sup = Some(t.f_sup);
        self
    }
}

/// Static properties of a calibration: divergence and direction of `B`,
/// the geometric evolution identity, shortness of `ξ` and coercivity of `ϑ`.
pub fn verify_static(spectral: &Spectral, cal: &Calibration) -> Result<CalibrationResiduals> {
    let grid = *cal.grid();
    grid.ensure_same(spectral.grid(), "calibration")?;
    let h = grid.h();
    let s = cal.distance.s.values();
    let tube = |k: usize| s[k].abs() < cal.delta;
    let norm = |k: usize| s[k].abs().max(h);

    let (mut div_b, mut tangential_b, mut support) = (None, None, 0usize);
    let mut bxi = vec![0.0; grid.len()];
    if let Some(b) = &cal.b {
        let div = spectral.divergence(b)?;
        let (mut dmax, mut tmax) = (0.0_f64, 0.0_f64);
        for k in 0..grid.len() {
            let v = b.at(k);
            let xi = cal.xi.at(k);
            bxi[k] = v[0] * xi[0] + v[1] * xi[1];
            if (v[0] != 0.0 || v[1] != 0.0) && xi[0] == 0.0 && xi[1] == 0.0 {
                support += 1;
            }
            if !tube(k) {
                continue;
            }
            let n = cal.distance.normal.at(k);
            let vn = v[0] * n[0] + v[1] * n[1];
            let tang = (v[0] - vn * n[0]).hypot(v[1] - vn * n[1]);
            dmax = dmax.max(div.values()[k].abs() / norm(k));
            tmax = tmax.max(tang / norm(k));
        }
        div_b = Some(dmax);
        tangential_b = Some(tmax);
    }

    let div_xi = cal.div_xi.values();
    let pts = cal.curve.points();
    let mut geometric = 0.0_f64;
    let mut forced = cal.b.as_ref().and(cal.velocity.as_ref()).map(|_| 0.0_f64);
    for k in (0..grid.len()).filter(|&k| tube(k)) {
        let r = bxi[k] + div_xi[k] - cal.lambda_star;
        geometric = geometric.max(r.abs() / norm(k));
        if let (Some(f), Some(v)) = (forced.as_mut(), cal.velocity.as_ref()) {
            let p = cal.distance.location[k];
            let n = v.len();
            let (a, c) = (pts[p.interval], pts[(p.interval + 1) % n]);
            let len = (c[0] - a[0]).hypot(c[1] - a[1]);
            let w = (p.tau / len).clamp(0.0, 1.0);
            let vp = (1.0 - w) * v[p.interval] + w * v[(p.interval + 1) % n];
            let defect = vp - cal.distance.curvature.values()[k] - cal.lambda_star;
            *f = f.max((r - defect).abs() / norm(k));
        }
    }

    let mut geometric_interface = 0.0_f64;
    for &p in cal.curve.points() {
        let xi = cal.xi.interpolate(p);
        let bx = cal.b.as_ref().map_or(0.0, |b| {
            let v = b.interpolate(p);
            v[0] * xi[0] + v[1] * xi[1]
        });
        let r = bx + cal.div_xi.interpolate(p) - cal.lambda_star;
        geometric_interface = geometric_interface.max(r.abs());
    }

    let xi_norm = cal.xi.norm();
    let (mut slack, mut c_short, mut xi_max) = (f64::NEG_INFINITY, f64::INFINITY, 0.0_f64);
    let theta = cal.theta.values();
    let (mut c_theta, mut sign_bad) = (f64::INFINITY, 0usize);
    let mut ratio = [f64::INFINITY, 0.0_f64];
    for k in 0..grid.len() {
        let d = s[k].abs();
        let len = xi_norm.values()[k];
        xi_max = xi_max.max(len);
        slack = slack.max((d * d).min(1.0) - (1.0 - len));
        if d > 0.5 * h {
            c_short = c_short.min((1.0 - len) / (d * d).min(1.0));
            c_theta = c_theta.min(theta[k].abs() / d.min(1.0));
            let q = theta[k].abs() / d.min(cal.delta);
            ratio = [ratio[0].min(q), ratio[1].max(q)];
        }
        if (s[k] > 0.0 && theta[k] >= 0.0) || (s[k] < 0.0 && theta[k] <= 0.0) {
            sign_bad += 1;
        }
    }
    let mut big_c: f64 = 0.0;
    let mut lower_bad = 0usize;
    for k in 0..grid.len() {
        let d = s[k].abs();
        let m = (c_theta * d).min(1.0);
        if m > theta[k].abs() * (1.0 + 1e-12) {
            lower_bad += 1;
        }
        if d > 0.5 * h {
            big_c = big_c.max(theta[k].abs() / m);
        }
    }

    Ok(CalibrationResiduals {
        div_b,
        tangential_b,
        geometric,
        geometric_forced: forced,
        geometric_interface,
        shortness_slack: slack,
        c_short: c_short.min(1.0),
        theta_coercivity: sign_bad + lower_bad,
        c_theta,
        big_c_theta: big_c,
        theta_ratio: ratio,
        xi_max,
        support_violations: support,
        ..Default::default()
    })
}

/// Transport identities between two calibrations `dt` apart, with time
/// derivatives by forward differences and `B` taken at the earlier time.
pub fn verify_transport(
    spectral: &Spectral,
    cal0: &Calibration,
    cal1: &Calibration,
    dt: f64,
) -> Result<TransportResiduals> {
    let grid = *cal0.grid();
    grid.ensure_same(cal1.grid(), "transport")?;
    grid.ensure_same(spectral.grid(), "transport")?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let (b, f) = match (&cal0.b, &cal0.f_diag) {
        (Some(b), Some(f)) => (b, f),
        _ => return Err(Error::param("B", "the earlier calibration has no extended velocity")),
    };
    let h = grid.h();
    let s0 = cal0.distance.s.values();
    let s1 = cal1.distance.s.values();

    let gtheta = spectral.gradient(&cal0.theta)?;
    let len2 = cal0.xi.norm().map(|v| v * v)?;
    let glen = spectral.gradient(&len2)?;
    let [gxx, gxy] = spectral.jacobian(&cal0.xi)?;
    let [gbx, gby] = spectral.jacobian(b)?;

    let mut out = TransportResiduals::default();
    for k in 0..grid.len() {
        if !(s0[k].abs() < cal0.delta && s1[k].abs() < cal1.delta) {
            continue;
        }
        let d = s0[k].abs().max(h);
        let v = b.at(k);
        let dot = |g: [f64; 2]| v[0] * g[0] + v[1] * g[1];

        let th = (cal1.theta.values()[k] - cal0.theta.values()[k]) / dt + dot(gtheta.at(k));
        out.theta_transport = out.theta_transport.max(th.abs() / d);

        let x0 = cal0.xi.at(k);
        let x1 = cal1.xi.at(k);
        let l1 = x1[0] * x1[0] + x1[1] * x1[1];
        let ln = (l1 - len2.values()[k]) / dt + dot(glen.at(k));
        out.xi_len_transport = out.xi_len_transport.max(ln.abs() / (d * d));

        let (bx, by) = (gbx.at(k), gby.at(k));
        let tr = [
            (x1[0] - x0[0]) / dt + dot(gxx.at(k)) + bx[0] * x0[0] + by[0] * x0[1],
            (x1[1] - x0[1]) / dt + dot(gxy.at(k)) + bx[1] * x0[0] + by[1] * x0[1],
        ];
        let fk = f.values()[k];
        let res = (tr[0] - fk * x0[0]).hypot(tr[1] - fk * x0[1]);
        out.xi_transport = out.xi_transport.max(res / d);
        let l0 = len2.values()[k];
        if l0 >= 0.25 {
            let measured = (tr[0] * x0[0] + tr[1] * x0[1]) / l0;
            out.f_crosscheck = out.f_crosscheck.max((measured - fk).abs());
        }
    }
    out.f_sup = f.max_abs();
    Ok(out)
}
