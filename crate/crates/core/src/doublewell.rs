//! The double-well potential `W(u) = 18 u² (u - 1)²` and its derived
//! quantities.
//!
//! The prefactor makes `φ(1) = ∫₀¹ √(2W) = 1`, so diffuse perimeters read off
//! directly as lengths. `√(2·18) = 6` is the steepness of the optimal profile.

/// Prefactor of the canonical well.
pub const PREFACTOR: f64 = 18.0;

/// Steepness of the optimal profile, `√(2 · PREFACTOR)`.
pub const PROFILE_RATE: f64 = 6.0;

#[inline]
pub fn w(u: f64) -> f64 {
    let a = u * (u - 1.0);
    PREFACTOR * a * a
}

#[inline]
pub fn w_prime(u: f64) -> f64 {
    2.0 * PREFACTOR * u * (u - 1.0) * (2.0 * u - 1.0)
}

/// `√(2W(u)) = 6 |u (u - 1)|`, the nonnegative branch.
#[inline]
pub fn sqrt_2w(u: f64) -> f64 {
    PROFILE_RATE * (u * (u - 1.0)).abs()
}

/// `φ(s) = ∫₀ˢ √(2W)`; equals `3s² - 2s³` on `[0, 1]`, monotone everywhere.
#[inline]
pub fn phi(s: f64) -> f64 {
    let p = 3.0 * s * s - 2.0 * s * s * s;
    if s < 0.0 {
        -p
    } else if s > 1.0 {
        2.0 - p
    } else {
        p
    }
}

/// One-dimensional equipartition profile `q(z) = 1 / (1 + e^{-6z})`.
///
/// Solves `q' = √(2W(q))`, `q(0) = 1/2`.
#[inline]
pub fn optimal_profile(z: f64) -> f64 {
    let z = z.clamp(-120.0, 120.0);
    1.0 / (1.0 + (-PROFILE_RATE * z).exp())
}

/// `q'(z) = 6 q (1 - q)`.
#[inline]
pub fn optimal_profile_slope(z: f64) -> f64 {
    let q = optimal_profile(z);
    PROFILE_RATE * q * (1.0 - q)
}
