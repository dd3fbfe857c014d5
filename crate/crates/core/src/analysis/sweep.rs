//! Damping sweeps: one independent trajectory per friction coefficient.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::Grid;
use crate::integrator::{evolve, StepperConfig, TerminationStatus, Trajectory};
use crate::par;
use crate::params::ModelParams;
use crate::profile::{sample_profile, InitialProfile, DEFAULT_TRUNCATION_TOL};

/// Everything except the friction coefficient.
#[derive(Debug, Clone)]
pub struct SweepBase {
    pub params: ModelParams,
    pub grid: Arc<Grid>,
    pub profile: InitialProfile,
    pub stepper: StepperConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Final `H^α` norm below half its initial value.
    Decayed,
    Bounded,
    /// Peak `H^α` norm above twice its initial value.
    Grew,
    Blowup,
    /// Non-finite values appeared; the point is flagged and skipped.
    Unstable,
}

impl Outcome {
    pub fn classify(traj: &Trajectory) -> Self {
        match traj.status {
            TerminationStatus::BlowupDetected => Outcome::Blowup,
            TerminationStatus::Instability => Outcome::Unstable,
            TerminationStatus::Completed => {
                let h0 = traj.initial_h_alpha;
                let last = traj.records.last().map_or(h0, |r| r.h_alpha_norm());
                if last < 0.5 * h0 {
                    Outcome::Decayed
                } else if traj.peak_h_alpha() > 2.0 * h0 {
                    Outcome::Grew
                } else {
                    Outcome::Bounded
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub alpha: f64,
    pub s: f64,
    pub a: f64,
    /// `‖u_0‖_{L²}`.
    pub mass_scale: f64,
    pub outcome: Outcome,
    pub status: TerminationStatus,
    /// `∫_0^T ‖u‖_θ^θ dt`.
    pub strichartz_acc: f64,
    pub peak_h_alpha: f64,
    pub final_time: f64,
    pub wall_time_s: f64,
}

/// Runs one trajectory per `a` value (in parallel) and returns the results
/// sorted by `a`.
pub fn sweep_damping(base: &SweepBase, a_values: &[f64]) -> Result<Vec<SweepResult>> {
    sweep_damping_with(base, a_values, |_| {})
}

/// As [`sweep_damping`], calling `on_result` as soon as each point finishes
/// (in completion order).
pub fn sweep_damping_with<F>(base: &SweepBase, a_values: &[f64], on_result: F) -> Result<Vec<SweepResult>>
where
    F: Fn(&SweepResult) + Sync + Send,
{
    let initial = sample_profile(&base.profile, &base.grid, DEFAULT_TRUNCATION_TOL)?;
    let params = a_values.iter().map(|&a| base.params.with_damping(a)).collect::<Result<Vec<_>>>()?;
    let runs = par::map_collect(&params, |p| {
        let start = Instant::now();
        let traj = evolve(&initial, p, &base.stepper)?;
        let last = traj.records.last().expect("initial record");
        let result = SweepResult {
            alpha: p.alpha(),
            s: p.s(),
            a: p.a(),
            mass_scale: traj.records[0].mass_sq.sqrt(),
            outcome: Outcome::classify(&traj),
            status: traj.status,
            strichartz_acc: last.strichartz_acc,
            peak_h_alpha: traj.peak_h_alpha(),
            final_time: last.t,
            wall_time_s: start.elapsed().as_secs_f64(),
        };
        on_result(&result);
        Ok(result)
    });
    let mut out = runs.into_iter().collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Monotonicity {
    /// Accumulators strictly decrease in `a` over the considered points.
    pub holds: bool,
    pub considered: Vec<f64>,
    /// `a = 0` and unstable points are excluded.
    pub excluded: Vec<f64>,
}

/// Checks that the final accumulator strictly decreases with `a > 0`.
pub fn accumulator_monotonicity(results: &[SweepResult]) -> Monotonicity {
    let (kept, dropped): (Vec<&SweepResult>, Vec<&SweepResult>) = results
        .iter()
        .partition(|r| r.a > 0.0 && r.outcome != Outcome::Unstable && r.strichartz_acc.is_finite());
    Monotonicity {
        holds: kept.windows(2).all(|w| w[1].strichartz_acc < w[0].strichartz_acc),
        considered: kept.iter().map(|r| r.a).collect(),
        excluded: dropped.iter().map(|r| r.a).collect(),
    }
}
