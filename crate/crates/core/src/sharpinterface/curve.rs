use std::f64::consts::PI;

use super::spline::ClosedSpline;
use crate::error::{Error, Result};

pub const MIN_NODES: usize = 16;

/// Closed, simple, counterclockwise polygon with cached geometry.
#[derive(Clone, Debug)]
pub struct Curve {
    points: Vec<[f64; 2]>,
    length: f64,
    area: f64,
    kappa: Vec<f64>,
    normal: Vec<[f64; 2]>,
    ds: Vec<f64>,
}

/// Geometry summary of a curve.
#[derive(Clone, Debug)]
pub struct Geometry<'a> {
    pub length: f64,
    pub area: f64,
    pub kappa: &'a [f64],
    pub normal: &'a [[f64; 2]],
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Shoelace signed area.
pub(crate) fn signed_area(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    0.5 * (0..n).map(|i| cross(points[i], points[(i + 1) % n])).sum::<f64>()
}

/// Signed Menger curvature of the triple; positive for a left turn.
pub fn menger_curvature(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let ab = sub(b, a);
    let bc = sub(c, b);
    let ca = sub(a, c);
    let (lab, lbc) = (norm(ab), norm(bc));
    let den = lab * lbc * norm(ca);
    let cr = cross(ab, bc);
    if den == 0.0 || cr.abs() <= 1e-14 * lab * lbc {
        return 0.0;
    }
    2.0 * cr / den
}

impl Curve {
    /// Validates and caches geometry. Rejects fewer than 16 nodes,
    /// non-finite coordinates, clockwise orientation and self-intersections.
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        let n = points.len();
        if n < MIN_NODES {
            return Err(Error::InvalidCurve(format!("{n} nodes, need at least {MIN_NODES}")));
        }
        if let Some(i) = points.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::InvalidCurve(format!("non-finite node {i}")));
        }
        for i in 0..n {
            if points[i] == points[(i + 1) % n] {
                return Err(Error::InvalidCurve(format!("repeated node {i}")));
            }
        }
        let area = signed_area(&points);
        if !(area > 0.0) {
            return Err(Error::InvalidCurve(format!(
                "signed area {area:e} is not positive; curve must be counterclockwise"
            )));
        }
        if let Some((i, j)) = first_crossing(&points) {
            return Err(Error::Topology(format!("segments {i} and {j} intersect")));
        }
        let mut kappa = Vec::with_capacity(n);
        let mut normal = Vec::with_capacity(n);
        let mut ds = Vec::with_capacity(n);
        let seg: Vec<f64> = (0..n).map(|i| norm(sub(points[(i + 1) % n], points[i]))).collect();
        for i in 0..n {
            let a = points[(i + n - 1) % n];
            let b = points[i];
            let c = points[(i + 1) % n];
            kappa.push(menger_curvature(a, b, c));
            let t = sub(c, a);
            let l = norm(t);
            normal.push([-t[1] / l, t[0] / l]);
            ds.push(0.5 * (seg[(i + n - 1) % n] + seg[i]));
        }
        Ok(Self {
            length: seg.iter().sum(),
            points,
            area,
            kappa,
            normal,
            ds,
        })
    }

    /// `n` nodes on the circle of radius `r` about `center`.
    pub fn circle(center: [f64; 2], r: f64, n: usize) -> Result<Self> {
        Self::ellipse(center, r, r, n)
    }

    /// `n` nodes on an axis-aligned ellipse, equally spaced in arclength.
    pub fn ellipse(center: [f64; 2], a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidCurve(format!("semi-axes {a}, {b} must be positive")));
        }
        let pts: Vec<[f64; 2]> = (0..n.max(4))
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n.max(4) as f64;
                [center[0] + a * t.cos(), center[1] + b * t.sin()]
            })
            .collect();
        if a == b {
            return Self::new(pts);
        }
        let fine = Self::new(
            (0..4 * n.max(MIN_NODES))
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / (4 * n.max(MIN_NODES)) as f64;
                    [center[0] + a * t.cos(), center[1] + b * t.sin()]
                })
                .collect(),
        )?;
        fine.resample(n)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn normals(&self) -> &[[f64; 2]] {
        &self.normal
    }

    /// Arclength weight of each node: half of its two adjacent edges.
    pub fn ds(&self) -> &[f64] {
        &self.ds
    }

    pub fn geometry(&self) -> Geometry<'_> {
        Geometry {
            length: self.length,
            area: self.area,
            kappa: &self.kappa,
            normal: &self.normal,
        }
    }

    pub fn min_spacing(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| norm(sub(self.points[(i + 1) % n], self.points[i])))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| norm(sub(self.points[(i + 1) % n], self.points[i])))
            .fold(0.0, f64::max)
    }

    /// Area-weighted centroid.
    pub fn centroid(&self) -> [f64; 2] {
        let n = self.points.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let p = self.points[i];
            let q = self.points[(i + 1) % n];
            let c = cross(p, q);
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
        }
        [cx / (6.0 * self.area), cy / (6.0 * self.area)]
    }

    /// Discrete Lagrange multiplier `Σ κ ds / L`.
    pub fn lambda_classical(&self) -> f64 {
        self.kappa.iter().zip(&self.ds).map(|(k, d)| k * d).sum::<f64>() / self.length
    }

    pub fn spline(&self) -> Result<ClosedSpline> {
        ClosedSpline::new(&self.points)
    }

    /// `n` nodes at equal arclength along the interpolating periodic spline.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::InvalidCurve(format!("{n} nodes, need at least {MIN_NODES}")));
        }
        Self::new(self.spline()?.equal_arclength(n))
    }

    /// Applies an affine map `x ↦ s·x + shift`.
    pub fn scaled(&self, s: f64, shift: [f64; 2]) -> Result<Self> {
        Self::new(
            self.points
                .iter()
                .map(|p| [s * p[0] + shift[0], s * p[1] + shift[1]])
                .collect(),
        )
    }
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(sub(p2, p1), sub(q1, p1));
    let d2 = cross(sub(p2, p1), sub(q2, p1));
    let d3 = cross(sub(q2, q1), sub(p1, q1));
    let d4 = cross(sub(q2, q1), sub(p2, q1));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: [f64; 2], b: [f64; 2], c: [f64; 2], d: f64| {
        d == 0.0 && c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    on(p1, p2, q1, d1) || on(p1, p2, q2, d2) || on(q1, q2, p1, d3) || on(q1, q2, p2, d4)
}

/// Sweep over x-extents; returns the first pair of non-adjacent edges that
/// intersect.
fn first_crossing(points: &[[f64; 2]]) -> Option<(usize, usize)> {
    let n = points.len();
    let edge = |i: usize| (points[i], points[(i + 1) % n]);
    let mut order: Vec<(f64, f64, usize)> = (0..n)
        .map(|i| {
            let (a, b) = edge(i);
            (a[0].min(b[0]), a[0].max(b[0]), i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut active: Vec<(f64, usize)> = Vec::new();
    for &(lo, hi, i) in &order {
        active.retain(|&(h, _)| h >= lo);
        let (a, b) = edge(i);
        for &(_, j) in &active {
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (c, d) = edge(j);
            if segments_cross(a, b, c, d) {
                return Some((i.min(j), i.max(j)));
            }
        }
        active.push((hi, i));
    }
    None
}
