//! Spectral fractional Laplacian and the damped linear semigroup
//! `S(t) = exp(-i t (-Δ)^α - a t (-Δ)^s)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{symbol, Grid};
use crate::params::ModelParams;

/// `(-Δ)^β u`, i.e. multiplication by `|ξ|^{2β}`.
pub fn fractional_laplacian(field: &Field, beta: f64) -> Field {
    let m = field.grid().symbol_power(beta);
    field.apply_real_multiplier(&m)
}

/// Per-mode factors of the semigroup at a fixed time.
#[derive(Debug, Clone)]
pub struct SemigroupMultiplier {
    t: f64,
    factors: Vec<Complex64>,
}

impl SemigroupMultiplier {
    pub fn new(grid: &Grid, params: &ModelParams, t: f64) -> Result<Self> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        let (alpha, s, a) = (params.alpha(), params.s(), params.a());
        let factors = grid
            .xi_sq()
            .iter()
            .map(|&q| semigroup_factor(q, alpha, s, a, t))
            .collect();
        Ok(Self { t, factors })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn factors(&self) -> &[Complex64] {
        &self.factors
    }

    /// Multiplies in a 0/1 mask (used for dealiasing).
    pub fn masked(mut self, mask: &[f64]) -> Self {
        for (f, m) in self.factors.iter_mut().zip(mask) {
            *f *= *m;
        }
        self
    }

    pub fn apply(&self, field: &Field) -> Field {
        field.apply_multiplier(&self.factors)
    }
}

/// `exp((-i q^α - a q^s) t)` for `q = |ξ|²`.
pub(crate) fn semigroup_factor(q: f64, alpha: f64, s: f64, a: f64, t: f64) -> Complex64 {
    let damping = if a == 0.0 { 0.0 } else { a * symbol(q, s) * t };
    Complex64::from_polar((-damping).exp(), -symbol(q, alpha) * t)
}

/// Exact linear flow over time `t >= 0`.
pub fn apply_semigroup(field: &Field, t: f64, params: &ModelParams) -> Result<Field> {
    Ok(SemigroupMultiplier::new(field.grid(), params, t)?.apply(field))
}

/// `‖S(t1+t2)u - S(t1)S(t2)u‖_{L²}`.
pub fn semigroup_compose_check(field: &Field, t1: f64, t2: f64, params: &ModelParams) -> Result<f64> {
    let joint = apply_semigroup(field, t1 + t2, params)?;
    let split = apply_semigroup(&apply_semigroup(field, t2, params)?, t1, params)?;
    joint.distance(&split)
}
