//! Refinement study of the mass and energy identity residuals.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::integrator::{evolve, slope, StepperConfig, TerminationStatus};
use crate::par;
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityStudy {
    pub dts: Vec<f64>,
    /// `max_t |mass residual|` for each step size.
    pub mass_residuals: Vec<f64>,
    /// `max_t |energy residual|` for each step size.
    pub energy_residuals: Vec<f64>,
    /// Log-log slope of mass residual against `dt`.
    pub mass_slope: f64,
    pub energy_slope: f64,
}

/// Runs the same problem at each `dt` (recording every step) and fits the
/// decay rate of the largest identity residual.
pub fn identity_refinement(
    initial: &Field,
    params: &ModelParams,
    dts: &[f64],
    t_end: f64,
    dealias: bool,
) -> Result<IdentityStudy> {
    if dts.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: dts.len() });
    }
    if dts.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::NotDecreasing);
    }
    let runs = par::map_collect(dts, |&dt| {
        let cfg = StepperConfig { dt, t_end, dealias, record_stride: 1, ..StepperConfig::default() };
        evolve(initial, params, &cfg)
    });
    let mut mass_residuals = Vec::new();
    let mut energy_residuals = Vec::new();
    for run in runs {
        let traj = run?;
        if traj.status != TerminationStatus::Completed {
            return Err(crate::error::invalid("initial", "refinement run did not complete"));
        }
        let max_abs = |f: fn(&crate::functionals::DiagnosticsRecord) -> Option<f64>| {
            traj.records.iter().filter_map(f).map(f64::abs).fold(0.0, f64::max)
        };
        mass_residuals.push(max_abs(|r| r.mass_resid));
        energy_residuals.push(max_abs(|r| r.energy_resid));
    }
    let xs: Vec<f64> = dts.iter().map(|h| h.ln()).collect();
    let fit = |v: &[f64]| slope(&xs, &v.iter().map(|r| r.ln()).collect::<Vec<_>>());
    Ok(IdentityStudy {
        dts: dts.to_vec(),
        mass_slope: fit(&mass_residuals),
        energy_slope: fit(&energy_residuals),
        mass_residuals,
        energy_residuals,
    })
}
