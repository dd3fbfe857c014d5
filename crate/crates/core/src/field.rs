//! Complex fields on a [`Grid`] with physical and spectral views.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::par;

/// Complex-valued state sampled at the grid nodes.
///
/// The spectral view (unnormalised forward DFT) is computed on demand and
/// cached until the values are mutated.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Field {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values, spectrum: OnceLock::new() }
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values, spectrum: OnceLock::new() })
    }

    /// Builds a field from `f(position)` at every node.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> Complex64 + Sync + Send) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        let g = grid.clone();
        par::for_each_mut(&mut values, |i, v| *v = f(&g.position(i)));
        Self { grid, values, spectrum: OnceLock::new() }
    }

    /// Builds a field from its spectral coefficients (unnormalised DFT).
    pub fn from_spectrum(grid: Arc<Grid>, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: coeffs.len() });
        }
        grid.fft_inverse(&mut coeffs);
        Ok(Self { grid, values: coeffs, spectrum: OnceLock::new() })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Mutable access to the nodal values; invalidates the spectral cache.
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        self.spectrum = OnceLock::new();
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Forward DFT coefficients `û_k = Σ_j u_j e^{-i k·x_j}` (cached).
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut buf = self.values.clone();
            self.grid.fft_forward(&mut buf);
            buf
        })
    }

    /// Applies a real Fourier multiplier `m(flat index)` and returns the result.
    pub fn apply_real_multiplier(&self, m: &[f64]) -> Field {
        debug_assert_eq!(m.len(), self.values.len());
        let mut coeffs = self.spectrum().to_vec();
        par::for_each_mut(&mut coeffs, |i, c| *c *= m[i]);
        Field::from_spectrum(self.grid.clone(), coeffs).expect("shape preserved")
    }

    /// Applies a complex Fourier multiplier and returns the result.
    pub fn apply_multiplier(&self, m: &[Complex64]) -> Field {
        debug_assert_eq!(m.len(), self.values.len());
        let mut coeffs = self.spectrum().to_vec();
        par::for_each_mut(&mut coeffs, |i, c| *c *= m[i]);
        Field::from_spectrum(self.grid.clone(), coeffs).expect("shape preserved")
    }

    /// Rectangle-rule integral of `f(u_j)`.
    pub fn integrate(&self, f: impl Fn(Complex64) -> f64 + Sync + Send) -> f64 {
        par::sum_by(&self.values, |_, v| f(*v)) * self.grid.cell_volume()
    }

    /// `Σ_k w(k) |û_k|²` scaled so that `w ≡ 1` gives the squared L² norm.
    pub fn spectral_energy(&self, weight: &[f64]) -> f64 {
        let spec = self.spectrum();
        par::sum_by(spec, |i, c| weight[i] * c.norm_sqr()) * self.grid.cell_volume() / self.grid.len() as f64
    }

    /// Squared L² norm by physical-space quadrature.
    pub fn norm_sq(&self) -> f64 {
        self.integrate(|v| v.norm_sqr())
    }

    /// Squared L² norm by Plancherel.
    pub fn norm_sq_spectral(&self) -> f64 {
        let spec = self.spectrum();
        par::sum_by(spec, |_, c| c.norm_sqr()) * self.grid.cell_volume() / self.grid.len() as f64
    }

    /// L² norm of `self - other`.
    pub fn distance(&self, other: &Field) -> Result<f64> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch);
        }
        let diff = par::sum_by(&self.values, |i, v| (v - other.values[i]).norm_sqr());
        Ok((diff * self.grid.cell_volume()).sqrt())
    }

    pub fn scaled(&self, factor: Complex64) -> Field {
        let mut out = self.clone();
        par::for_each_mut(out.values_mut(), |_, v| *v *= factor);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Field with values reflected through the box centre.
    pub fn reflected(&self) -> Field {
        let values = (0..self.values.len()).map(|i| self.values[self.grid.reflect(i)]).collect();
        Field { grid: self.grid.clone(), values, spectrum: OnceLock::new() }
    }
}
