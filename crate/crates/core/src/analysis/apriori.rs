//! Mass monotonicity and the time-integrated dissipation bound
//! `(∫_0^T ‖(-Δ)^{s/2}u‖² dt)^{1/2} <= ‖u_0‖/√(2a)`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::integrator::Trajectory;
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriReport {
    /// `‖u_0‖_{L²}`.
    pub mass0: f64,
    /// `max_t ‖u(t)‖_{L²}` over the records.
    pub sup_mass: f64,
    /// `mass0 - sup_mass`.
    pub sup_margin: f64,
    /// Recorded squared mass never increases.
    pub monotone: bool,
    /// `(∫_0^T h_s dt)^{1/2}` by the trapezoid rule.
    pub dissipation_norm: f64,
    /// `mass0 / √(2a)`.
    pub dissipation_bound: f64,
    /// `dissipation_bound - dissipation_norm`.
    pub dissipation_margin: f64,
}

pub fn apriori_bounds_check(traj: &Trajectory, params: &ModelParams) -> Result<AprioriReport> {
    if !(params.a() > 0.0) {
        return Err(invalid("a", "a-priori bounds need a > 0"));
    }
    let recs = &traj.records;
    let first = recs.first().ok_or(Error::TooFewSamples { needed: 1, got: 0 })?;
    let mass0 = first.mass_sq.sqrt();
    let sup_mass = recs.iter().map(|r| r.mass_sq).fold(f64::NEG_INFINITY, f64::max).sqrt();
    let monotone = recs.windows(2).all(|w| w[1].mass_sq <= w[0].mass_sq);
    let integral: f64 = recs.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].h_s_sq + w[1].h_s_sq)).sum();
    let dissipation_norm = integral.sqrt();
    let dissipation_bound = mass0 / (2.0 * params.a()).sqrt();
    Ok(AprioriReport {
        mass0,
        sup_mass,
        sup_margin: mass0 - sup_mass,
        monotone,
        dissipation_norm,
        dissipation_bound,
        dissipation_margin: dissipation_bound - dissipation_norm,
    })
}
