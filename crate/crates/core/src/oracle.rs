//! Dense-matrix realisation of the linear semigroup, independent of the FFT
//! path. Only meant for small one-dimensional grids in tests.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::params::ModelParams;

pub const ORACLE_MAX_N: usize = 16;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum()).collect()
    }

    fn scale(&mut self, c: Complex64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    fn add_assign(&mut self, other: &DenseMatrix) {
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let n = self.n;
        (0..n).map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling and squaring with a truncated Taylor
    /// series on the scaled matrix.
    pub fn expm(&self) -> DenseMatrix {
        let n = self.n;
        let norm = self.norm_one();
        let mut squarings = 0u32;
        if norm > 0.5 {
            squarings = (norm / 0.5).log2().ceil() as u32;
        }
        let mut scaled = self.clone();
        scaled.scale(Complex64::new(0.5f64.powi(squarings as i32), 0.0));

        let mut result = DenseMatrix::identity(n);
        let mut term = DenseMatrix::identity(n);
        for k in 1..=30 {
            term = term.mul(&scaled);
            term.scale(Complex64::new(1.0 / k as f64, 0.0));
            result.add_assign(&term);
            if term.norm_one() < 1e-20 {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.mul(&result);
        }
        result
    }
}

/// Generator `-i(-Δ)^α - a(-Δ)^s` as a dense matrix, assembled from the
/// explicit DFT matrix `F_{kj} = exp(-2πi kj/n)` and its inverse.
pub fn dense_generator(n: usize, box_length: f64, params: &ModelParams) -> DenseMatrix {
    let dft = |sign: f64| -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n);
        for k in 0..n {
            for j in 0..n {
                let ang = sign * 2.0 * PI * ((k * j) % n) as f64 / n as f64;
                m.data[k * n + j] = Complex64::from_polar(1.0, ang);
            }
        }
        m
    };
    let forward = dft(-1.0);
    let mut inverse = dft(1.0);
    inverse.scale(Complex64::new(1.0 / n as f64, 0.0));

    let mut diag = DenseMatrix::zeros(n);
    for k in 0..n {
        let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        let xi = (2.0 * PI * signed / box_length).abs();
        let pow = |e: f64| if xi == 0.0 && e > 0.0 { 0.0 } else { xi.powf(e) };
        diag.data[k * n + k] = Complex64::new(-params.a() * pow(2.0 * params.s()), -pow(2.0 * params.alpha()));
    }
    inverse.mul(&diag).mul(&forward)
}

/// `exp(t G) u` for the dense generator `G`.
pub fn dense_oracle_semigroup(field: &Field, t: f64, params: &ModelParams) -> Result<Field> {
    let grid = field.grid();
    let n = grid.n_per_dim();
    if grid.dim() != 1 || n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge { d: grid.dim(), n, max: ORACLE_MAX_N });
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let mut gen = dense_generator(n, grid.box_length(), params);
    gen.scale(Complex64::new(t, 0.0));
    let values = gen.expm().mul_vec(field.values());
    Field::from_values(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::sync::Arc;

    #[test]
    fn expm_of_zero_is_identity() {
        assert_eq!(DenseMatrix::zeros(4).expm(), DenseMatrix::identity(4));
    }

    #[test]
    fn expm_of_diagonal() {
        let mut m = DenseMatrix::zeros(3);
        let d = [Complex64::new(-3.0, 2.0), Complex64::new(0.5, -7.0), Complex64::new(0.0, 0.0)];
        for (i, v) in d.iter().enumerate() {
            m.data[i * 3 + i] = *v;
        }
        let e = m.expm();
        for (i, v) in d.iter().enumerate() {
            assert!((e.get(i, i) - v.exp()).norm() < 1e-13 * v.exp().norm().max(1.0));
        }
    }

    #[test]
    fn oracle_rejects_large_or_2d_grids() {
        let p = ModelParams::new(1, 0.8, 0.5, 1.0).unwrap();
        let big = Field::zeros(Arc::new(Grid::new(32, 1.0, 1).unwrap()));
        assert!(matches!(dense_oracle_semigroup(&big, 1.0, &p), Err(Error::OracleTooLarge { .. })));
        let flat = Field::zeros(Arc::new(Grid::new(4, 1.0, 2).unwrap()));
        assert!(matches!(dense_oracle_semigroup(&flat, 1.0, &p), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn undamped_single_mode_is_pure_phase() {
        let grid = Arc::new(Grid::new(8, 2.0 * PI, 1).unwrap());
        let p = ModelParams::new(1, 1.0, 0.5, 0.0).unwrap();
        let u = Field::from_fn(grid, |x| Complex64::from_polar(1.0, 2.0 * x[0]));
        let v = dense_oracle_semigroup(&u, 0.37, &p).unwrap();
        for (a, b) in v.values().iter().zip(u.values()) {
            assert!((a.norm() - 1.0).abs() < 1e-13);
            assert!((a - b * Complex64::from_polar(1.0, -4.0 * 0.37)).norm() < 1e-12);
        }
    }
}
