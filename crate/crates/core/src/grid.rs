//! Periodic Cartesian grid on the torus `[-L/2, L/2)^d` and its Fourier lattice.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::par;

/// Uniform periodic grid with `n` points per axis in `d` dimensions.
///
/// Flat storage is row-major: for `d = 2` the index of node `(i, j)` is
/// `i * n + j`, with `i` running along the first axis. Frequencies follow
/// the standard FFT wraparound order `0, 1, …, n/2-1, -n/2, …, -1`.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    d: usize,
    length: f64,
    spacing: f64,
    cell_volume: f64,
    /// Integer mode index per axis, wraparound order.
    modes: Vec<i64>,
    /// `|ξ|²` per flat index.
    xi_sq: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("d", &self.d)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d && self.length == other.length
    }
}

impl Grid {
    pub fn new(n: usize, length: f64, d: usize) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid("box_length", format!("must be positive, got {length}")));
        }
        let half = (n / 2) as i64;
        let modes: Vec<i64> = (0..n as i64).map(|k| if k < half { k } else { k - n as i64 }).collect();
        let dk = 2.0 * PI / length;
        let k_sq: Vec<f64> = modes.iter().map(|&k| (dk * k as f64).powi(2)).collect();
        let xi_sq = match d {
            1 => k_sq,
            _ => {
                let mut v = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        v.push(k_sq[i] + k_sq[j]);
                    }
                }
                v
            }
        };
        let spacing = length / n as f64;
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            d,
            length,
            spacing,
            cell_volume: spacing.powi(d as i32),
            modes,
            xi_sq,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n_per_dim(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn box_length(&self) -> f64 {
        self.length
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    /// Quadrature weight of one node, `(L/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }
    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.d as i32)
    }
    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.xi_sq.len()
    }
    pub fn is_empty(&self) -> bool {
        self.xi_sq.is_empty()
    }

    /// Integer mode indices along one axis, wraparound order.
    pub fn mode_indices(&self) -> &[i64] {
        &self.modes
    }

    /// Wavenumbers `2πk/L` along one axis.
    pub fn axis_frequencies(&self) -> Vec<f64> {
        let dk = 2.0 * PI / self.length;
        self.modes.iter().map(|&k| dk * k as f64).collect()
    }

    /// Frequency vector at a flat index.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let dk = 2.0 * PI / self.length;
        self.multi_index(flat).into_iter().map(|i| dk * self.modes[i] as f64).collect()
    }

    /// `|ξ|²` for every flat index.
    pub fn xi_sq(&self) -> &[f64] {
        &self.xi_sq
    }

    /// `|ξ|^{2β}` at every lattice point, with `|0|^{2β} = 0` for `β > 0`.
    pub fn symbol_power(&self, beta: f64) -> Vec<f64> {
        self.xi_sq.iter().map(|&q| symbol(q, beta)).collect()
    }

    /// Per-axis indices of a flat index.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        match self.d {
            1 => vec![flat],
            _ => vec![flat / self.n, flat % self.n],
        }
    }

    /// Coordinate of node `j` along an axis: `(j - n/2) h`. The reflection
    /// `j -> (n - j) mod n` negates it exactly.
    pub fn coordinate(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.spacing
    }

    /// Physical position of the node at a flat index.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).into_iter().map(|j| self.coordinate(j)).collect()
    }

    /// Flat index of the node reflected through the box centre.
    pub fn reflect(&self, flat: usize) -> usize {
        let r = |j: usize| (self.n - j) % self.n;
        match self.d {
            1 => r(flat),
            _ => r(flat / self.n) * self.n + r(flat % self.n),
        }
    }

    /// True when the mode survives the 2/3-rule truncation on every axis.
    pub fn is_dealiased_mode(&self, flat: usize) -> bool {
        self.multi_index(flat)
            .into_iter()
            .all(|i| 3 * self.modes[i].unsigned_abs() < self.n as u64)
    }

    /// 0/1 mask implementing the 2/3 rule.
    pub fn dealias_mask(&self) -> Vec<f64> {
        (0..self.len()).map(|i| if self.is_dealiased_mode(i) { 1.0 } else { 0.0 }).collect()
    }

    /// Unnormalised forward DFT in place (sign `e^{-ikx}`).
    pub fn fft_forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse DFT in place, including the `1/n^d` normalisation.
    pub fn fft_inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        par::for_each_mut(data, |_, v| *v *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid");
        let n = self.n;
        let rows = |buf: &mut [Complex64]| {
            par::for_each_row_mut(buf, n, |_, row| plan.process(row));
        };
        match self.d {
            1 => plan.process(data),
            _ => {
                rows(data);
                let mut t = transpose(data, n);
                rows(&mut t);
                data.copy_from_slice(&transpose(&t, n));
            }
        }
    }
}

/// `q^β` with the convention `0^β = 0` for `β > 0` and `q^0 = 1`.
pub(crate) fn symbol(q: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else if q == 0.0 {
        0.0
    } else {
        q.powf(beta)
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    par::for_each_row_mut(&mut out, n, |j, row| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = data[i * n + j];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_lattice_examples() {
        let g = Grid::new(4, 2.0 * PI, 1).unwrap();
        assert_eq!(g.axis_frequencies(), vec![0.0, 1.0, -2.0, -1.0]);
        let g = Grid::new(2, 1.0, 1).unwrap();
        assert_eq!(g.axis_frequencies(), vec![0.0, -2.0 * PI]);
        let g = Grid::new(4, 2.0 * PI, 2).unwrap();
        assert_eq!(g.len(), 16);
        let flat = 4 + 1;
        assert!((g.xi_sq()[flat].sqrt() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.frequency(flat), vec![1.0, 1.0]);
    }

    #[test]
    fn zero_frequency_once() {
        for d in [1, 2] {
            let g = Grid::new(8, 3.0, d).unwrap();
            assert_eq!(g.xi_sq().iter().filter(|&&q| q == 0.0).count(), 1);
            assert_eq!(g.len(), 8usize.pow(d as u32));
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(Grid::new(6, 1.0, 1).unwrap_err(), Error::NotPowerOfTwo(6));
        assert_eq!(Grid::new(1, 1.0, 1).unwrap_err(), Error::NotPowerOfTwo(1));
        assert!(Grid::new(8, 0.0, 1).is_err());
        assert_eq!(Grid::new(8, 1.0, 3).unwrap_err(), Error::UnsupportedDimension(3));
    }

    #[test]
    fn cell_volume_sums_to_box() {
        for d in [1, 2] {
            let g = Grid::new(16, 7.3, d).unwrap();
            let total = g.cell_volume() * g.len() as f64;
            assert!((total - g.volume()).abs() <= 1e-12 * g.volume());
        }
    }

    #[test]
    fn reflection_negates_coordinates() {
        let g = Grid::new(16, 5.0, 2).unwrap();
        for flat in 0..g.len() {
            let r = g.reflect(flat);
            assert_eq!(g.reflect(r), flat);
            let (x, y) = (g.position(flat), g.position(r));
            for (a, b) in x.iter().zip(&y) {
                // the corner row maps to itself modulo L
                assert!(*a == -*b || (a.abs() == 2.5 && a == b));
            }
        }
    }

    #[test]
    fn fft_round_trip_2d() {
        let g = Grid::new(8, 1.0, 2).unwrap();
        let orig: Vec<Complex64> =
            (0..g.len()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut buf = orig.clone();
        g.fft_forward(&mut buf);
        g.fft_inverse(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn dealias_mask_keeps_low_modes() {
        let g = Grid::new(64, 1.0, 1).unwrap();
        let kept = g.dealias_mask().iter().filter(|&&m| m == 1.0).count();
        // |k| <= 21
        assert_eq!(kept, 43);
    }
}
