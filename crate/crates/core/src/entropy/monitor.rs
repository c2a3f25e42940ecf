use serde::{Deserialize, Serialize};

use super::EntropyReport;
use crate::error::{Error, Result};

/// Added to `E_rel + E_bulk` before taking logarithms.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Empirical Gronwall behaviour of `E_rel + E_bulk` along a paired run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    /// Least-squares slope of `log(E + floor)` against `Λ(t) = ∫(1 + |λ| + |λ*|)`.
    pub rate: f64,
    pub intercept: f64,
    /// `(E(T) + floor) / (E(0) + floor)`: the empirical constant `C(T)`.
    pub c_fit: f64,
    /// `max_t (E(t) + floor) / (E(0) + floor)`.
    pub max_growth: f64,
    /// `Λ(T)`.
    pub lambda_integral: f64,
    pub initial: f64,
    pub last: f64,
    /// Largest excess of `log E` over `log E(0) + max(rate, 0)·Λ`, a
    /// super-exponential growth indicator.
    pub excess: f64,
    pub samples: usize,
}

impl StabilitySummary {
    pub fn bounded(&self) -> bool {
        self.rate.is_finite() && self.c_fit.is_finite() && self.max_growth.is_finite()
    }
}

/// Fits the stability estimate to time-ordered reports; `lambda` and
/// `lambda_star` give the multipliers at the report times.
pub fn stability_monitor(reports: &[EntropyReport], lambda: &[f64], lambda_star: &[f64]) -> Result<StabilitySummary> {
    if reports.is_empty() {
        return Err(Error::EmptySeries("entropy reports"));
    }
    if lambda.len() != reports.len() || lambda_star.len() != reports.len() {
        return Err(Error::Misaligned(format!(
            "{} reports but {} and {} multiplier samples",
            reports.len(),
            lambda.len(),
            lambda_star.len()
        )));
    }
    if reports.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Misaligned("report times must be strictly increasing".into()));
    }
    let n = reports.len();
    let mut x = vec![0.0; n];
    for i in 1..n {
        let g = |j: usize| 1.0 + lambda[j].abs() + lambda_star[j].abs();
        x[i] = x[i - 1] + 0.5 * (g(i) + g(i - 1)) * (reports[i].t - reports[i - 1].t);
    }
    let y: Vec<f64> = reports
        .iter()
        .map(|r| (r.total().max(0.0) + ENTROPY_FLOOR).ln())
        .collect();
    let (rate, intercept) = if n == 1 {
        (0.0, y[0])
    } else {
        let mx = x.iter().sum::<f64>() / n as f64;
        let my = y.iter().sum::<f64>() / n as f64;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let rate = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        (rate, my - rate * mx)
    };
    let y0 = y[0];
    let max_growth = y.iter().map(|v| (v - y0).exp()).fold(0.0, f64::max);
    let excess = x
        .iter()
        .zip(&y)
        .map(|(a, b)| b - y0 - rate.max(0.0) * a)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilitySummary {
        rate,
        intercept,
        c_fit: (y[n - 1] - y0).exp(),
        max_growth,
        lambda_integral: x[n - 1],
        initial: reports[0].total(),
        last: reports[n - 1].total(),
        excess,
        samples: n,
    })
}
