//! Empirical mass threshold separating non-increasing from increasing
//! energy in the `s < α`, `s + α >= 1` regime.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::gn::GnConstant;
use crate::grid::Grid;
use crate::integrator::{evolve, StepperConfig, TerminationStatus, Trajectory};
use crate::params::ModelParams;
use crate::profile::{sample_profile, InitialProfile, DEFAULT_TRUNCATION_TOL};

/// Energy increases below this multiple of the identity-residual scale are
/// treated as discretisation noise.
pub const RESIDUAL_NOISE_FACTOR: f64 = 10.0;

/// True when `E(t)` never increases by more than the residual-aware
/// tolerance between consecutive records.
pub fn energy_non_increasing(traj: &Trajectory) -> bool {
    if traj.status == TerminationStatus::Instability {
        return false;
    }
    let resid = traj
        .records
        .iter()
        .filter_map(|r| r.energy_resid)
        .map(f64::abs)
        .fold(0.0, f64::max);
    traj.records.windows(2).all(|w| {
        let dt = w[1].t - w[0].t;
        let rate = (w[1].energy - w[0].energy) / dt;
        let rounding = 1e-12 * (w[0].energy.abs() + w[1].energy.abs()) / dt;
        rate <= RESIDUAL_NOISE_FACTOR * resid + rounding
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdStatus {
    Bracketed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub status: ThresholdStatus,
    /// `s < α` and `s + α >= 1`.
    pub hypotheses_met: bool,
    /// Largest amplitude scale seen with non-increasing energy.
    pub lower_scale: f64,
    /// Smallest amplitude scale seen with increasing energy.
    pub upper_scale: Option<f64>,
    /// `‖u_0‖_{L²}` at the geometric midpoint of the bracket.
    pub crossover_mass: Option<f64>,
    /// Coercivity mass from the empirical GN constant, if supplied.
    pub gn_beta: Option<f64>,
    pub runs: usize,
}

impl ThresholdReport {
    /// The crossover sits at or above the GN-derived smallness bound.
    pub fn consistent_with_gn(&self) -> Option<bool> {
        Some(self.crossover_mass? >= self.gn_beta?)
    }
}

/// Bisects the amplitude scale of `profile` between `scale_lo` (energy
/// non-increasing) and `scale_hi` (energy increasing). If `scale_hi` does
/// not yet show an increase it is doubled; every run counts against
/// `budget`.
#[allow(clippy::too_many_arguments)]
pub fn mass_threshold_probe(
    profile: &InitialProfile,
    params: &ModelParams,
    grid: &Arc<Grid>,
    stepper: &StepperConfig,
    scale_lo: f64,
    scale_hi: f64,
    budget: usize,
    gn: Option<&GnConstant>,
) -> Result<ThresholdReport> {
    let hypotheses_met = params.s() < params.alpha() && params.s() + params.alpha() >= 1.0;
    let unit_mass = sample_profile(profile, grid, DEFAULT_TRUNCATION_TOL)?.norm_sq().sqrt() / profile.amplitude.norm();
    let gn_beta = gn.map(|g| g.coercivity_mass(params));

    let mut runs = 0;
    let mut probe = |scale: f64| -> Result<bool> {
        runs += 1;
        let p = profile.with_amplitude(profile.amplitude / profile.amplitude.norm() * Complex64::new(scale, 0.0));
        let u0 = sample_profile(&p, grid, DEFAULT_TRUNCATION_TOL)?;
        Ok(energy_non_increasing(&evolve(&u0, params, stepper)?))
    };

    let mut lo = scale_lo;
    let mut hi = scale_hi;
    let mut bracketed = false;
    let lo_ok = probe(lo)?;
    if lo_ok {
        let mut left = budget.saturating_sub(1);
        while left > 0 {
            left -= 1;
            if probe(hi)? {
                lo = hi;
                hi *= 2.0;
            } else {
                bracketed = true;
                break;
            }
        }
        while bracketed && left > 0 {
            left -= 1;
            let mid = (lo * hi).sqrt();
            if probe(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let status = if bracketed { ThresholdStatus::Bracketed } else { ThresholdStatus::Inconclusive };
    Ok(ThresholdReport {
        status,
        hypotheses_met,
        lower_scale: lo,
        upper_scale: bracketed.then_some(hi),
        crossover_mass: bracketed.then(|| (lo * hi).sqrt() * unit_mass),
        gn_beta,
        runs,
    })
}
