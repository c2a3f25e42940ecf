use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{PeriodicGrid, ScalarField, VectorField};
use crate::error::Result;

/// FFT plans and wavenumbers for one grid.
///
/// First-derivative symbols zero the Nyquist mode, and the Laplacian uses the
/// square of the same symbol, so `laplacian == divergence ∘ gradient` holds
/// to round-off for every field. Each worker owns its own `Spectral`.
pub struct Spectral {
    grid: PeriodicGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: PeriodicGrid) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let base = 2.0 * PI / grid.side();
        let k = (0..n)
            .map(|m| {
                if m < n / 2 {
                    base * m as f64
                } else if m == n / 2 {
                    0.0
                } else {
                    base * (m as f64 - n as f64)
                }
            })
            .collect();
        Self { grid, fwd, inv, k }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Derivative wavenumbers in FFT order (Nyquist entry is zero).
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// `|k|²` of the derivative symbol at spectral index `(i, j)`.
    #[inline]
    pub fn k2(&self, i: usize, j: usize) -> f64 {
        self.k[i] * self.k[i] + self.k[j] * self.k[j]
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, n);
    }

    /// Unnormalised forward DFT of the samples.
    pub fn forward(&self, f: &ScalarField) -> Vec<Complex64> {
        self.forward_slice(f.values())
    }

    pub(crate) fn forward_slice(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.fwd);
        data
    }

    /// Inverse DFT (normalised), keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spectrum, &self.inv);
        let scale = 1.0 / self.grid.len() as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    /// Multiply a spectrum by `symbol(i, j)` and transform back.
    pub fn apply(&self, spectrum: &[Complex64], symbol: impl Fn(usize, usize) -> Complex64) -> Vec<f64> {
        let n = self.grid.n();
        let mut out = Vec::with_capacity(spectrum.len());
        for j in 0..n {
            for i in 0..n {
                out.push(spectrum[j * n + i] * symbol(i, j));
            }
        }
        self.inverse_real(out)
    }

    /// Gradient from an already transformed field.
    pub fn gradient_hat(&self, spectrum: &[Complex64]) -> VectorField {
        let gx = self.apply(spectrum, |i, _| Complex64::new(0.0, self.k[i]));
        let gy = self.apply(spectrum, |_, j| Complex64::new(0.0, self.k[j]));
        VectorField::from_vecs_unchecked(self.grid, gx, gy)
    }

    /// Laplacian from an already transformed field.
    pub fn laplacian_hat(&self, spectrum: &[Complex64]) -> ScalarField {
        let v = self.apply(spectrum, |i, j| Complex64::new(-self.k2(i, j), 0.0));
        ScalarField::from_vec_unchecked(self.grid, v)
    }

    pub fn gradient(&self, f: &ScalarField) -> Result<VectorField> {
        self.grid.ensure_same(f.grid(), "gradient")?;
        Ok(self.gradient_hat(&self.forward(f)))
    }

    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        self.grid.ensure_same(f.grid(), "laplacian")?;
        Ok(self.laplacian_hat(&self.forward(f)))
    }

    pub fn divergence(&self, v: &VectorField) -> Result<ScalarField> {
        self.grid.ensure_same(v.grid(), "divergence")?;
        let n = self.grid.n();
        let fx = self.forward_slice(v.x());
        let fy = self.forward_slice(v.y());
        let mut out = Vec::with_capacity(fx.len());
        for j in 0..n {
            for i in 0..n {
                let m = j * n + i;
                out.push(Complex64::new(0.0, self.k[i]) * fx[m] + Complex64::new(0.0, self.k[j]) * fy[m]);
            }
        }
        Ok(ScalarField::from_vec_unchecked(self.grid, self.inverse_real(out)))
    }

    /// Jacobian `[[∂x vx, ∂y vx], [∂x vy, ∂y vy]]` of a vector field.
    pub fn jacobian(&self, v: &VectorField) -> Result<[VectorField; 2]> {
        self.grid.ensure_same(v.grid(), "jacobian")?;
        let gx = self.gradient_hat(&self.forward_slice(v.x()));
        let gy = self.gradient_hat(&self.forward_slice(v.y()));
        Ok([gx, gy])
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in (j + 1)..n {
            data.swap(j * n + i, i * n + j);
        }
    }
}
