//! One-dimensional profiles of the calibration: the length cutoff `ζ`, the
//! truncated identity used for `ϑ` and the bump `h` that localises `B`.
//!
//! Each profile is glued on `[δ/2, δ]` by a quintic Hermite join, which
//! matches value, slope and second derivative at both ends.

/// Quintic on `[0, L]` with value/slope/second derivative `a` at 0 and
/// `b` at `L`, evaluated at `x`. Returns value and first derivative.
fn hermite5(x: f64, len: f64, a: [f64; 3], b: [f64; 3]) -> (f64, f64) {
    let t = x / len;
    let (t2, t3, t4, t5) = (t * t, t * t * t, t.powi(4), t.powi(5));
    let h = [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        0.5 * (t3 - 2.0 * t4 + t5),
    ];
    let dh = [
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
        30.0 * t2 - 60.0 * t3 + 30.0 * t4,
        -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
        0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
    ];
    let c = [a[0], len * a[1], len * len * a[2], b[0], len * b[1], len * len * b[2]];
    let v = (0..6).map(|k| c[k] * h[k]).sum();
    let d = (0..6).map(|k| c[k] * dh[k]).sum::<f64>() / len;
    (v, d)
}

/// `ζ(r)` and `ζ'(r)` for `r ≥ 0`: `1 − r²` up to `δ/2`, zero beyond `δ`.
pub fn zeta(r: f64, delta: f64) -> (f64, f64) {
    let half = 0.5 * delta;
    if r <= half {
        (1.0 - r * r, -2.0 * r)
    } else if r >= delta {
        (0.0, 0.0)
    } else {
        hermite5(r - half, half, [1.0 - half * half, -delta, -2.0], [0.0; 3])
    }
}

/// Odd truncation of the identity: `r` for `|r| ≤ δ/2`, `±δ` for `|r| ≥ δ`.
pub fn truncate(r: f64, delta: f64) -> f64 {
    let half = 0.5 * delta;
    let a = r.abs();
    let v = if a <= half {
        a
    } else if a >= delta {
        delta
    } else {
        hermite5(a - half, half, [half, 1.0, 0.0], [delta, 0.0, 0.0]).0
    };
    v.copysign(r)
}

/// Even bump: 1 on `[−δ/2, δ/2]`, 0 outside `(−δ, δ)`. Returns value and
/// derivative.
pub fn bump(r: f64, delta: f64) -> (f64, f64) {
    let half = 0.5 * delta;
    let a = r.abs();
    if a <= half {
        (1.0, 0.0)
    } else if a >= delta {
        (0.0, 0.0)
    } else {
        let (v, d) = hermite5(a - half, half, [1.0, 0.0, 0.0], [0.0; 3]);
        (v, if r < 0.0 { -d } else { d })
    }
}
