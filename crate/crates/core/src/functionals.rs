//! Mass, energy, fractional seminorms and the dissipation identities.
//!
//! Along smooth solutions
//!
//! ```text
//! d/dt ‖u‖²  = -2a ‖(-Δ)^{s/2} u‖²
//! d/dt E(u)  = -a ‖(-Δ)^{(s+α)/2} u‖² + a Re ∫ ((-Δ)^s u) |u|^{p-1} ū
//! ```
//!
//! with `E(u) = ½‖(-Δ)^{α/2}u‖² - d/(4α+2d) ‖u‖_θ^θ`. The coupling term is
//! also reported with `Im` in place of `Re`, the form in which it is often
//! quoted; only the `Re` form matches `dE/dt` along trajectories (see the
//! integration tests).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::par;
use crate::params::ModelParams;
use crate::semigroup::fractional_laplacian;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mass {
    pub norm: f64,
    pub squared: f64,
}

pub fn mass(field: &Field) -> Mass {
    let squared = field.norm_sq();
    Mass { norm: squared.sqrt(), squared }
}

/// `‖(-Δ)^{σ/2} u‖²_{L²}`, computed in Fourier space.
pub fn seminorm_sq(field: &Field, sigma: f64) -> f64 {
    field.spectral_energy(&field.grid().symbol_power(sigma))
}

/// `∫ |u|^q`.
pub fn lp_norm_pow(field: &Field, q: f64) -> f64 {
    field.integrate(|v| v.norm().powf(q))
}

/// Coefficient `d/(4α+2d) = 1/θ` of the potential term.
pub fn potential_coefficient(params: &ModelParams) -> f64 {
    let d = params.d() as f64;
    d / (4.0 * params.alpha() + 2.0 * d)
}

pub fn energy(field: &Field, params: &ModelParams) -> f64 {
    0.5 * seminorm_sq(field, params.alpha()) - potential_coefficient(params) * lp_norm_pow(field, params.theta())
}

/// Right-hand side of the energy identity, term by term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRhs {
    /// `-a ‖(-Δ)^{(s+α)/2} u‖²`.
    pub dissipation: f64,
    /// `a Re ∫ ((-Δ)^s u) |u|^{p-1} ū`.
    pub coupling_re: f64,
    /// `a Im ∫ ((-Δ)^s u) |u|^{p-1} ū`.
    pub coupling_im: f64,
}

impl EnergyRhs {
    /// `dE/dt` along the flow.
    pub fn total(&self) -> f64 {
        self.dissipation + self.coupling_re
    }

    /// The same sum with the imaginary-part coupling.
    pub fn total_with_im_coupling(&self) -> f64 {
        self.dissipation + self.coupling_im
    }
}

pub fn energy_identity_rhs(field: &Field, params: &ModelParams) -> EnergyRhs {
    let a = params.a();
    if a == 0.0 {
        return EnergyRhs { dissipation: 0.0, coupling_re: 0.0, coupling_im: 0.0 };
    }
    let dissipation = -a * seminorm_sq(field, params.s() + params.alpha());
    let (re, im) = coupling_integral(field, params);
    EnergyRhs { dissipation, coupling_re: a * re, coupling_im: a * im }
}

/// `∫ ((-Δ)^s u) |u|^{p-1} ū` split into real and imaginary parts.
fn coupling_integral(field: &Field, params: &ModelParams) -> (f64, f64) {
    let lap = fractional_laplacian(field, params.s());
    let pm1 = params.p() - 1.0;
    let u = field.values();
    let w = |i: usize, l: &Complex64| l * u[i].conj() * u[i].norm().powf(pm1);
    let dv = field.grid().cell_volume();
    let re = par::sum_by(lap.values(), |i, l| w(i, l).re) * dv;
    let im = par::sum_by(lap.values(), |i, l| w(i, l).im) * dv;
    (re, im)
}

/// Snapshot of every tracked functional at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_sq: f64,
    pub energy: f64,
    pub h_alpha_sq: f64,
    pub h_s_sq: f64,
    pub h_salpha_sq: f64,
    pub lp_theta: f64,
    pub strichartz_acc: f64,
    /// `dE/dt` predicted by the identity at this time.
    pub energy_rate: f64,
    pub mass_resid: Option<f64>,
    pub energy_resid: Option<f64>,
}

impl DiagnosticsRecord {
    /// Evaluates all functionals of `field`; residuals are left empty.
    pub fn compute(field: &Field, params: &ModelParams, t: f64, strichartz_acc: f64) -> Self {
        let h_alpha_sq = seminorm_sq(field, params.alpha());
        let lp_theta = lp_norm_pow(field, params.theta());
        let rhs = energy_identity_rhs(field, params);
        Self {
            t,
            mass_sq: field.norm_sq(),
            energy: 0.5 * h_alpha_sq - potential_coefficient(params) * lp_theta,
            h_alpha_sq,
            h_s_sq: seminorm_sq(field, params.s()),
            h_salpha_sq: seminorm_sq(field, params.s() + params.alpha()),
            lp_theta,
            strichartz_acc,
            energy_rate: rhs.total(),
            mass_resid: None,
            energy_resid: None,
        }
    }

    /// `‖u‖_{H^α}` with the inhomogeneous norm `(‖u‖² + ‖(-Δ)^{α/2}u‖²)^{1/2}`.
    pub fn h_alpha_norm(&self) -> f64 {
        (self.mass_sq + self.h_alpha_sq).sqrt()
    }

    /// Fills both residuals from the preceding record.
    pub fn attach_residuals(&mut self, prev: &DiagnosticsRecord, params: &ModelParams) -> Result<()> {
        self.mass_resid = Some(mass_identity_residual(prev, self, params)?);
        self.energy_resid = Some(energy_identity_residual(prev, self)?);
        Ok(())
    }
}

/// `(m(t+Δ) - m(t))/Δ + 2a · mean(h_s)` with `m = ‖u‖²`.
pub fn mass_identity_residual(prev: &DiagnosticsRecord, next: &DiagnosticsRecord, params: &ModelParams) -> Result<f64> {
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    Ok((next.mass_sq - prev.mass_sq) / dt + params.a() * (prev.h_s_sq + next.h_s_sq))
}

/// `(E(t+Δ) - E(t))/Δ - mean(dE/dt)`.
pub fn energy_identity_residual(prev: &DiagnosticsRecord, next: &DiagnosticsRecord) -> Result<f64> {
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    Ok((next.energy - prev.energy) / dt - 0.5 * (prev.energy_rate + next.energy_rate))
}

/// Running trapezoid integral of `‖u(t)‖_θ^θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccumulatorSeries {
    pub theta: f64,
    pub times: Vec<f64>,
    /// `∫_0^t ‖u‖_θ^θ`.
    pub integral: Vec<f64>,
    /// `(∫_0^t ‖u‖_θ^θ)^{1/θ}`.
    pub norm: Vec<f64>,
}

impl AccumulatorSeries {
    pub fn final_integral(&self) -> f64 {
        *self.integral.last().unwrap_or(&0.0)
    }
}

pub fn strichartz_accumulate(records: &[DiagnosticsRecord], params: &ModelParams) -> Result<AccumulatorSeries> {
    if records.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: records.len() });
    }
    let theta = params.theta();
    let mut integral = Vec::with_capacity(records.len());
    let mut acc = 0.0;
    integral.push(0.0);
    for w in records.windows(2) {
        acc += 0.5 * (w[1].t - w[0].t) * (w[0].lp_theta + w[1].lp_theta);
        integral.push(acc);
    }
    let norm = integral.iter().map(|v| v.powf(1.0 / theta)).collect();
    Ok(AccumulatorSeries { theta, times: records.iter().map(|r| r.t).collect(), integral, norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::profile::{sample_profile, InitialProfile};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn plane_wave(grid: &Arc<Grid>, k: i64, c: Complex64) -> Field {
        sample_profile(&InitialProfile::single_mode(c, vec![k; grid.dim()]), grid, 1.0).unwrap()
    }

    #[test]
    fn zero_field_functionals() {
        let grid = Arc::new(Grid::new(16, 4.0, 2).unwrap());
        let p = ModelParams::new(2, 0.8, 0.5, 1.0).unwrap();
        let z = Field::zeros(grid);
        assert_eq!(mass(&z), Mass { norm: 0.0, squared: 0.0 });
        assert_eq!(energy(&z, &p), 0.0);
        let rhs = energy_identity_rhs(&z, &p);
        assert_eq!(rhs.total(), 0.0);
    }

    #[test]
    fn constant_field_mass() {
        let grid = Arc::new(Grid::new(8, 3.0, 2).unwrap());
        let c = Complex64::new(0.3, 0.4);
        let f = Field::from_fn(grid.clone(), |_| c);
        let m = mass(&f);
        let v = grid.volume();
        assert!((m.squared - 0.25 * v).abs() < 1e-13);
        assert!((m.norm - 0.5 * v.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn plane_wave_energy_closed_form() {
        let grid = Arc::new(Grid::new(16, 2.0 * PI, 1).unwrap());
        let p = ModelParams::new(1, 0.8, 0.5, 1.0).unwrap();
        let c = Complex64::new(0.7, -0.2);
        let f = plane_wave(&grid, 3, c);
        let l = grid.volume();
        let expected = 0.5 * c.norm_sqr() * 3f64.powf(1.6) * l - (1.0 / (3.2 + 2.0)) * c.norm().powf(p.theta()) * l;
        assert!((energy(&f, &p) - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn undamped_rhs_vanishes() {
        let grid = Arc::new(Grid::new(32, 10.0, 1).unwrap());
        let p = ModelParams::new(1, 0.8, 0.5, 0.0).unwrap();
        let f = sample_profile(&InitialProfile::gaussian(1.0, 1.0), &grid, 1e-6).unwrap();
        assert_eq!(energy_identity_rhs(&f, &p).total(), 0.0);
    }

    #[test]
    fn real_field_has_no_imaginary_coupling() {
        let grid = Arc::new(Grid::new(64, 16.0, 1).unwrap());
        let p = ModelParams::new(1, 0.8, 0.5, 1.5).unwrap();
        let f = sample_profile(&InitialProfile::gaussian(1.2, 1.0), &grid, 1e-10).unwrap();
        let rhs = energy_identity_rhs(&f, &p);
        assert!(rhs.coupling_im.abs() <= 1e-12);
        let h = seminorm_sq(&f, 1.3);
        assert!((rhs.total_with_im_coupling() + 1.5 * h).abs() <= 1e-12 * h);
    }

    #[test]
    fn plancherel_matches_quadrature() {
        let grid = Arc::new(Grid::new(32, 12.0, 2).unwrap());
        let f = Field::from_fn(grid, |x| Complex64::new((-x[0] * x[0]).exp() * x[1].cos(), (-(x[1] * x[1])).exp()));
        assert!((f.norm_sq() - f.norm_sq_spectral()).abs() <= 1e-10 * f.norm_sq());
    }

    #[test]
    fn residual_rejects_non_increasing_times() {
        let grid = Arc::new(Grid::new(8, 4.0, 1).unwrap());
        let p = ModelParams::new(1, 0.8, 0.5, 1.0).unwrap();
        let r = DiagnosticsRecord::compute(&Field::zeros(grid), &p, 1.0, 0.0);
        assert_eq!(mass_identity_residual(&r, &r, &p), Err(Error::NonPositiveStep(0.0)));
    }

    #[test]
    fn accumulator_needs_two_records() {
        let grid = Arc::new(Grid::new(8, 4.0, 1).unwrap());
        let p = ModelParams::new(1, 0.8, 0.5, 1.0).unwrap();
        let r = DiagnosticsRecord::compute(&Field::zeros(grid), &p, 0.0, 0.0);
        assert!(matches!(strichartz_accumulate(&[r], &p), Err(Error::TooFewSamples { .. })));
    }
}
