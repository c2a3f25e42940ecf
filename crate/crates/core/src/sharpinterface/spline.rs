//! Closed periodic cubic spline through the nodes of a polygon, parametrised
//! by cumulative chord length.

use crate::error::{Error, Result};

// 8-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_X: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

#[derive(Clone, Debug)]
pub struct ClosedSpline {
    nodes: Vec<[f64; 2]>,
    /// Interval lengths in the chord parameter.
    h: Vec<f64>,
    /// Second derivatives at the nodes, per component.
    m: Vec<[f64; 2]>,
    /// Cumulative spline arclength at the nodes; `arc[n]` is the total.
    arc: Vec<f64>,
}

/// Point on the spline: interval index and local parameter in `[0, h_i]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplinePoint {
    pub interval: usize,
    pub tau: f64,
}

impl ClosedSpline {
    pub fn new(nodes: &[[f64; 2]]) -> Result<Self> {
        let n = nodes.len();
        if n < 4 {
            return Err(Error::InvalidCurve(format!("spline needs at least 4 nodes, got {n}")));
        }
        let h: Vec<f64> = (0..n)
            .map(|i| {
                let a = nodes[i];
                let b = nodes[(i + 1) % n];
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .collect();
        if let Some(i) = h.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidCurve(format!("repeated or non-finite node at {i}")));
        }
        let mut m = vec![[0.0; 2]; n];
        for c in 0..2 {
            let y: Vec<f64> = nodes.iter().map(|p| p[c]).collect();
            let sub: Vec<f64> = (0..n).map(|i| h[(i + n - 1) % n]).collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.0 * (h[(i + n - 1) % n] + h[i])).collect();
            let sup: Vec<f64> = h.clone();
            let rhs: Vec<f64> = (0..n)
                .map(|i| {
                    let ip = (i + 1) % n;
                    let im = (i + n - 1) % n;
                    6.0 * ((y[ip] - y[i]) / h[i] - (y[i] - y[im]) / h[im])
                })
                .collect();
            let sol = solve_cyclic(&sub, &diag, &sup, &rhs);
            for i in 0..n {
                m[i][c] = sol[i];
            }
        }
        let mut s = Self {
            nodes: nodes.to_vec(),
            h,
            m,
            arc: Vec::new(),
        };
        let mut arc = Vec::with_capacity(n + 1);
        arc.push(0.0);
        for i in 0..n {
            let last = arc[i];
            arc.push(last + s.partial_arc(i, s.h[i]));
        }
        s.arc = arc;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interval_len(&self, i: usize) -> f64 {
        self.h[i]
    }

    /// Total arclength of the spline.
    pub fn length(&self) -> f64 {
        self.arc[self.nodes.len()]
    }

    /// Position, first and second derivative (w.r.t. the chord parameter).
    pub fn eval(&self, p: SplinePoint) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let n = self.nodes.len();
        let i = p.interval;
        let j = (i + 1) % n;
        let h = self.h[i];
        let t = p.tau;
        let a = h - t;
        let mut pos = [0.0; 2];
        let mut d1 = [0.0; 2];
        let mut d2 = [0.0; 2];
        for c in 0..2 {
            let (mi, mj) = (self.m[i][c], self.m[j][c]);
            let (yi, yj) = (self.nodes[i][c], self.nodes[j][c]);
            let ci = yi / h - mi * h / 6.0;
            let cj = yj / h - mj * h / 6.0;
            pos[c] = (a * a * a * mi + t * t * t * mj) / (6.0 * h) + ci * a + cj * t;
            d1[c] = (-a * a * mi + t * t * mj) / (2.0 * h) - ci + cj;
            d2[c] = (a * mi + t * mj) / h;
        }
        (pos, d1, d2)
    }

    pub fn position(&self, p: SplinePoint) -> [f64; 2] {
        self.eval(p).0
    }

    /// Unit inner normal (left of the tangent).
    pub fn normal(&self, p: SplinePoint) -> [f64; 2] {
        let (_, d, _) = self.eval(p);
        let s = d[0].hypot(d[1]);
        [-d[1] / s, d[0] / s]
    }

    /// Signed curvature; positive where the curve turns left.
    pub fn curvature(&self, p: SplinePoint) -> f64 {
        let (_, d, dd) = self.eval(p);
        let s = d[0].hypot(d[1]);
        (d[0] * dd[1] - d[1] * dd[0]) / (s * s * s)
    }

    fn speed(&self, i: usize, tau: f64) -> f64 {
        let (_, d, _) = self.eval(SplinePoint { interval: i, tau });
        d[0].hypot(d[1])
    }

    /// Arclength of interval `i` from its start to local parameter `tau`.
    fn partial_arc(&self, i: usize, tau: f64) -> f64 {
        let half = 0.5 * tau;
        GL_X.iter()
            .zip(GL_W.iter())
            .map(|(x, w)| w * self.speed(i, half * (x + 1.0)))
            .sum::<f64>()
            * half
    }

    /// Point at arclength `s` (taken modulo the total length).
    pub fn at_arclength(&self, s: f64) -> SplinePoint {
        let total = self.length();
        let s = s.rem_euclid(total);
        let n = self.nodes.len();
        let i = match self
            .arc
            .binary_search_by(|a| a.partial_cmp(&s).expect("finite arclength"))
        {
            Ok(k) => k.min(n - 1),
            Err(k) => k.saturating_sub(1).min(n - 1),
        };
        let target = s - self.arc[i];
        let h = self.h[i];
        let seg = self.arc[i + 1] - self.arc[i];
        let mut tau = (target / seg * h).clamp(0.0, h);
        for _ in 0..8 {
            let f = self.partial_arc(i, tau) - target;
            let d = self.speed(i, tau);
            let next = (tau - f / d).clamp(0.0, h);
            let done = (next - tau).abs() < 1e-15 * h;
            tau = next;
            if done {
                break;
            }
        }
        SplinePoint { interval: i, tau }
    }

    /// `count` points at equal spline arclength, starting at node 0.
    pub fn equal_arclength(&self, count: usize) -> Vec<[f64; 2]> {
        let total = self.length();
        (0..count)
            .map(|k| {
                if k == 0 {
                    self.nodes[0]
                } else {
                    self.position(self.at_arclength(total * k as f64 / count as f64))
                }
            })
            .collect()
    }

    /// Local closest point to `x` by Newton iteration from `start`.
    pub fn project(&self, x: [f64; 2], start: SplinePoint) -> SplinePoint {
        let n = self.nodes.len();
        let mut p = start;
        for _ in 0..30 {
            let (pos, d1, d2) = self.eval(p);
            let r = [pos[0] - x[0], pos[1] - x[1]];
            let g = r[0] * d1[0] + r[1] * d1[1];
            let speed2 = d1[0] * d1[0] + d1[1] * d1[1];
            let gp = speed2 + r[0] * d2[0] + r[1] * d2[1];
            // Near the focal set the Hessian can lose positivity; fall back to
            // a tangential step.
            let step = if gp > 0.25 * speed2 { g / gp } else { g / speed2 };
            let mut tau = p.tau - step;
            let mut i = p.interval;
            let mut guard = 0;
            while tau < 0.0 && guard < n {
                i = (i + n - 1) % n;
                tau += self.h[i];
                guard += 1;
            }
            while tau > self.h[i] && guard < 2 * n {
                tau -= self.h[i];
                i = (i + 1) % n;
                guard += 1;
            }
            p = SplinePoint { interval: i, tau };
            if step.abs() < 1e-14 * self.h[i] {
                break;
            }
        }
        p
    }
}

/// Solves a cyclic tridiagonal system (`sub[0]` couples to the last unknown,
/// `sup[n-1]` to the first) via Sherman–Morrison.
fn solve_cyclic(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &b, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &b, sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = if i < n - 1 { sup[i] / den } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(n: usize, r: f64) -> Vec<[f64; 2]> {
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    #[test]
    fn cyclic_solver_matches_dense_product() {
        let n = 7;
        let sub: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let sup: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 * 0.05).collect();
        let diag: Vec<f64> = (0..n).map(|i| 5.0 + i as f64).collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| sub[i] * x_true[(i + n - 1) % n] + diag[i] * x_true[i] + sup[i] * x_true[(i + 1) % n])
            .collect();
        let x = solve_cyclic(&sub, &diag, &sup, &rhs);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn circle_spline_is_accurate() {
        let r = 0.25;
        let s = ClosedSpline::new(&circle(128, r)).unwrap();
        assert!(
            (s.length() - 2.0 * PI * r).abs() < 5e-8,
            "{}",
            s.length() - 2.0 * PI * r
        );
        for k in 0..50 {
            let p = s.at_arclength(k as f64 * 0.031);
            let q = s.position(p);
            assert!((q[0].hypot(q[1]) - r).abs() < 1e-8);
            assert!((s.curvature(p) - 1.0 / r).abs() < 1e-3, "{}", s.curvature(p) - 1.0 / r);
        }
    }

    #[test]
    fn projection_onto_circle() {
        let r = 0.25;
        let s = ClosedSpline::new(&circle(256, r)).unwrap();
        for &(x, y) in &[(0.1, 0.05), (0.3, -0.2), (-0.02, 0.2)] {
            let start = SplinePoint { interval: 0, tau: 0.0 };
            // Start from the nearest node to mimic the caller.
            let k = (0..256)
                .min_by(|&a, &b| {
                    let pa = s.position(SplinePoint { interval: a, tau: 0.0 });
                    let pb = s.position(SplinePoint { interval: b, tau: 0.0 });
                    let da = (pa[0] - x).hypot(pa[1] - y);
                    let db = (pb[0] - x).hypot(pb[1] - y);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            let _ = start;
            let p = s.project([x, y], SplinePoint { interval: k, tau: 0.0 });
            let q = s.position(p);
            let d = (q[0] - x).hypot(q[1] - y);
            let exact = (x * x + y * y).sqrt() - r;
            assert!((d - exact.abs()).abs() < 1e-9, "{d} vs {exact}");
        }
    }
}
