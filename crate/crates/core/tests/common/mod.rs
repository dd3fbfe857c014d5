#![allow(dead_code)]

use std::sync::Arc;

use fnls_core::{Field, Grid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth random field: random low-mode spectrum, decaying with |k|.
pub fn random_smooth_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Field {
    let coeffs = (0..grid.len())
        .map(|i| {
            let k2: f64 = grid.multi_index(i).iter().map(|&j| (grid.mode_indices()[j] as f64).powi(2)).sum();
            let damp = (-0.25 * k2).exp();
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * damp
        })
        .collect();
    Field::from_spectrum(grid.clone(), coeffs).unwrap()
}

/// Random nodal values, no smoothness.
pub fn random_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Field {
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Field::from_values(grid.clone(), values).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
