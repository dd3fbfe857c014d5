//! Forward-only scattering defect
//! `δ(t0, t1) = ‖u(t1) - S(t1 - t0) u(t0)‖_{L²}`.
//!
//! The defect measures how far the nonlinear flow drifts from the linear
//! semigroup after `t0`; it tends to zero exactly when the linear-frame
//! states form a Cauchy family. Only forward applications of `S` are used,
//! since `S(-t)` amplifies high modes when `a > 0`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::functionals::seminorm_sq;
use crate::integrator::Trajectory;
use crate::params::ModelParams;
use crate::semigroup::apply_semigroup;

pub fn scattering_defect(traj: &Trajectory, t0: f64, t1: f64, params: &ModelParams) -> Result<f64> {
    if t1 < t0 {
        return Err(invalid("t1", format!("must be >= t0 = {t0}, got {t1}")));
    }
    let u0 = traj.snapshot(t0).ok_or(Error::MissingSnapshot(t0))?;
    let u1 = traj.snapshot(t1).ok_or(Error::MissingSnapshot(t1))?;
    if t0 == t1 {
        return Ok(0.0);
    }
    let linear = apply_semigroup(u0, t1 - t0, params)?;
    u1.distance(&linear)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectEntry {
    pub t0: f64,
    pub t1: f64,
    pub defect: f64,
}

/// Representative of the scattering state: `u(t0)` at the latest base time
/// whose defect is below tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringState {
    pub t0: f64,
    pub mass: f64,
    pub h_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringResult {
    pub entries: Vec<DefectEntry>,
    pub u_plus: Option<ScatteringState>,
}

impl ScatteringResult {
    /// Defects strictly decrease along the base times.
    pub fn strictly_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].defect < w[0].defect)
    }
}

/// Defects `δ(t0, factor·t0)` for each base time.
pub fn scattering_study(
    traj: &Trajectory,
    base_times: &[f64],
    factor: f64,
    params: &ModelParams,
    tolerance: f64,
) -> Result<ScatteringResult> {
    if !(factor >= 1.0) {
        return Err(invalid("factor", "horizon factor must be >= 1"));
    }
    let mut entries = Vec::with_capacity(base_times.len());
    for &t0 in base_times {
        let t1 = factor * t0;
        entries.push(DefectEntry { t0, t1, defect: scattering_defect(traj, t0, t1, params)? });
    }
    let u_plus = entries
        .iter()
        .filter(|e| e.defect <= tolerance)
        .max_by(|a, b| a.t0.total_cmp(&b.t0))
        .and_then(|e| traj.snapshot(e.t0).map(|f| (e.t0, f)))
        .map(|(t0, f)| ScatteringState {
            t0,
            mass: f.norm_sq().sqrt(),
            h_alpha: (f.norm_sq() + seminorm_sq(f, params.alpha())).sqrt(),
        });
    Ok(ScatteringResult { entries, u_plus })
}
