use crate::error::{Error, Result};
use crate::fields::{wrap_periodic, PeriodicGrid, ScalarField, VectorField};
use crate::sharpinterface::{ClosedSpline, Curve, SplinePoint};

/// Signed distance to a curve, positive inside, with the closest-point data.
#[derive(Clone, Debug)]
pub struct SignedDistance {
    /// `s(x)`, positive inside the enclosed set.
    pub s: ScalarField,
    /// Closest point on the curve (in the periodic image nearest `x`).
    pub projection: VectorField,
    /// Unit inner normal at the closest point; equals `∇s` off the cut locus.
    pub normal: VectorField,
    /// Curve curvature at the closest point.
    pub curvature: ScalarField,
    /// Index of the closest curve node.
    pub nearest_node: Vec<usize>,
    /// Spline parameter of the closest point, for interpolating nodal data.
    pub location: Vec<SplinePoint>,
}

/// Largest admissible tube radius for `curve`: half the smallest radius of
/// curvature.
pub fn max_tube_radius(curve: &Curve) -> f64 {
    let kmax = curve.kappa().iter().fold(0.0_f64, |a, k| a.max(k.abs()));
    0.5 / kmax.max(f64::MIN_POSITIVE)
}

/// Default tube radius: half of the curvature limit, further capped so the
/// tube fits inside a quarter of the domain and cannot wrap around.
pub fn default_tube_radius(curve: &Curve, grid: &PeriodicGrid) -> f64 {
    let kmax = curve.kappa().iter().fold(0.0_f64, |a, k| a.max(k.abs()));
    (0.5 / kmax.max(f64::MIN_POSITIVE)).min(0.25 * grid.side())
}

/// Closest point on segment `a → b` to `x`; returns (parameter in [0, 1], distance²).
fn segment_projection(a: [f64; 2], b: [f64; 2], x: [f64; 2]) -> (f64, f64) {
    let d = [b[0] - a[0], b[1] - a[1]];
    let r = [x[0] - a[0], x[1] - a[1]];
    let t = ((r[0] * d[0] + r[1] * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
    let e = [r[0] - t * d[0], r[1] - t * d[1]];
    (t, e[0] * e[0] + e[1] * e[1])
}

/// Closest-point record for one query point.
#[derive(Clone, Copy, Debug)]
pub struct ClosestPoint {
    pub s: f64,
    pub point: [f64; 2],
    pub normal: [f64; 2],
    pub curvature: f64,
    pub node: usize,
    pub location: SplinePoint,
}

/// Signed distance from `x` to the periodic copies of `curve` (period
/// `side`), refined on the interpolating spline.
pub fn distance_at(curve: &Curve, spline: &ClosedSpline, x: [f64; 2], side: f64) -> ClosestPoint {
    let pts = curve.points();
    let n = pts.len();
    let mut best = (f64::INFINITY, 0usize, 0.0, x);
    for i in 0..n {
        let a = pts[i];
        // Image of x nearest to the segment start.
        let img = [
            a[0] + wrap_periodic(x[0] - a[0], side),
            a[1] + wrap_periodic(x[1] - a[1], side),
        ];
        let (t, d2) = segment_projection(a, pts[(i + 1) % n], img);
        if d2 < best.0 {
            best = (d2, i, t, img);
        }
    }
    let (d2, i, t, img) = best;
    let start = SplinePoint {
        interval: i,
        tau: t * spline.interval_len(i),
    };
    let mut p = spline.project(img, start);
    let mut pos = spline.position(p);
    let mut dist = (img[0] - pos[0]).hypot(img[1] - pos[1]);
    // Newton can wander off near the focal set; keep the polyline guess then.
    if dist > d2.sqrt() + 0.5 * curve.max_spacing() {
        p = start;
        pos = spline.position(start);
        dist = (img[0] - pos[0]).hypot(img[1] - pos[1]);
    }
    let m = spline.normal(p);
    let side_sign = (img[0] - pos[0]) * m[0] + (img[1] - pos[1]) * m[1];
    let node = if p.tau <= 0.5 * spline.interval_len(p.interval) {
        p.interval
    } else {
        (p.interval + 1) % n
    };
    ClosestPoint {
        s: if side_sign >= 0.0 { dist } else { -dist },
        point: pos,
        normal: m,
        curvature: spline.curvature(p),
        node,
        location: p,
    }
}

/// Signed distance on every grid node. `delta` is the intended tube radius
/// and must not exceed [`max_tube_radius`].
pub fn signed_distance(curve: &Curve, grid: &PeriodicGrid, delta: f64) -> Result<SignedDistance> {
    let limit = max_tube_radius(curve);
    if !(delta > 0.0 && delta <= limit * (1.0 + 1e-12)) {
        return Err(Error::param(
            "delta",
            format!("tube radius {delta} exceeds curvature limit {limit}"),
        ));
    }
    let spline = curve.spline()?;
    let m = grid.len();
    let mut s = Vec::with_capacity(m);
    let (mut px, mut py) = (Vec::with_capacity(m), Vec::with_capacity(m));
    let (mut nx, mut ny) = (Vec::with_capacity(m), Vec::with_capacity(m));
    let mut kap = Vec::with_capacity(m);
    let mut nearest = Vec::with_capacity(m);
    let mut location = Vec::with_capacity(m);
    for k in 0..m {
        let c = distance_at(curve, &spline, grid.point_at(k), grid.side());
        s.push(c.s);
        px.push(c.point[0]);
        py.push(c.point[1]);
        nx.push(c.normal[0]);
        ny.push(c.normal[1]);
        kap.push(c.curvature);
        nearest.push(c.node);
        location.push(c.location);
    }
    Ok(SignedDistance {
        s: ScalarField::from_vec_unchecked(*grid, s),
        projection: VectorField::from_vecs_unchecked(*grid, px, py),
        normal: VectorField::from_vecs_unchecked(*grid, nx, ny),
        curvature: ScalarField::from_vec_unchecked(*grid, kap),
        nearest_node: nearest,
        location,
    })
}
