//! Strang splitting for `u_t = -i(-Δ)^α u - a(-Δ)^s u + i|u|^{p-1}u`.
//!
//! One step is `N(dt/2) ∘ S(dt) ∘ N(dt/2)`, where `S` is the exact linear
//! semigroup and `N` the exact pointwise phase rotation; the only error is
//! the splitting commutator, so the scheme is second order.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::functionals::{lp_norm_pow, seminorm_sq, DiagnosticsRecord};
use crate::grid::Grid;
use crate::par;
use crate::params::ModelParams;
use crate::semigroup::SemigroupMultiplier;

/// Step-size halving driven by the per-step mass-identity residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveControl {
    /// Relative residual above which a step is retried with half the step.
    pub tolerance: f64,
    pub max_halvings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    /// 2/3-rule truncation after each linear substep.
    pub dealias: bool,
    /// Abort once `‖u‖_{H^α}` exceeds this multiple of its initial value.
    pub blowup_threshold: f64,
    /// Steps between diagnostic records.
    pub record_stride: usize,
    /// Times at which full field snapshots are kept.
    pub snapshot_times: Vec<f64>,
    pub adaptive: Option<AdaptiveControl>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 1.0,
            dealias: true,
            blowup_threshold: 1e3,
            record_stride: 1,
            snapshot_times: Vec::new(),
            adaptive: None,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", format!("must be >= 0, got {}", self.t_end)));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(invalid("blowup_threshold", format!("must exceed 1, got {}", self.blowup_threshold)));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride", "must be at least 1"));
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(invalid("snapshot_times", "times must be finite and >= 0"));
        }
        if let Some(ad) = self.adaptive {
            if !(ad.tolerance > 0.0) {
                return Err(invalid("adaptive.tolerance", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Exact flow of `u_t = i|u|^{p-1}u` over time `dt`: `u e^{i dt |u|^{p-1}}`.
pub fn nonlinear_substep(field: &Field, dt: f64, params: &ModelParams) -> Field {
    let pm1 = params.p() - 1.0;
    let mut out = field.clone();
    par::for_each_mut(out.values_mut(), |_, v| {
        let phase = dt * v.norm().powf(pm1);
        *v *= Complex64::from_polar(1.0, phase);
    });
    out
}

/// Reusable stepping state: caches the linear multiplier for the base step.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: ModelParams,
    grid: Arc<Grid>,
    dt: f64,
    mask: Option<Vec<f64>>,
    linear: SemigroupMultiplier,
}

impl Stepper {
    pub fn new(grid: Arc<Grid>, params: ModelParams, dt: f64, dealias: bool) -> Result<Self> {
        if dt < 0.0 {
            return Err(Error::NegativeTime(dt));
        }
        let mask = dealias.then(|| grid.dealias_mask());
        let linear = Self::multiplier(&grid, &params, dt, mask.as_deref())?;
        Ok(Self { params, grid, dt, mask, linear })
    }

    fn multiplier(grid: &Grid, params: &ModelParams, dt: f64, mask: Option<&[f64]>) -> Result<SemigroupMultiplier> {
        let m = SemigroupMultiplier::new(grid, params, dt)?;
        Ok(match mask {
            Some(mask) => m.masked(mask),
            None => m,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One Strang step of size `dt` (the cached multiplier is used when `dt`
    /// equals the base step).
    pub fn step(&self, field: &Field, dt: f64) -> Result<Field> {
        if dt < 0.0 {
            return Err(Error::NegativeTime(dt));
        }
        if dt == 0.0 {
            return Ok(field.clone());
        }
        let half = nonlinear_substep(field, 0.5 * dt, &self.params);
        let lin = if dt == self.dt {
            self.linear.apply(&half)
        } else {
            Self::multiplier(&self.grid, &self.params, dt, self.mask.as_deref())?.apply(&half)
        };
        Ok(nonlinear_substep(&lin, 0.5 * dt, &self.params))
    }
}

/// Single Strang step `N(dt/2) ∘ S(dt) ∘ N(dt/2)`.
pub fn strang_step(field: &Field, dt: f64, params: &ModelParams, config: &StepperConfig) -> Result<Field> {
    Stepper::new(field.grid().clone(), *params, dt, config.dealias)?.step(field, dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationStatus {
    Completed,
    BlowupDetected,
    Instability,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<(f64, Field)>,
    pub status: TerminationStatus,
    pub steps: usize,
    /// `‖u_0‖_{H^α}`.
    pub initial_h_alpha: f64,
    pub final_field: Field,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }

    pub fn peak_h_alpha(&self) -> f64 {
        self.records.iter().map(|r| r.h_alpha_norm()).fold(0.0, f64::max)
    }

    /// Snapshot stored at (or within `1e-9` of) time `t`.
    pub fn snapshot(&self, t: f64) -> Option<&Field> {
        self.snapshots
            .iter()
            .find(|(ts, _)| (ts - t).abs() <= 1e-9 * t.abs().max(1.0))
            .map(|(_, f)| f)
    }
}

/// Steps `initial` to `config.t_end` or until breakdown.
pub fn evolve(initial: &Field, params: &ModelParams, config: &StepperConfig) -> Result<Trajectory> {
    config.validate()?;
    if !initial.is_finite() {
        return Err(invalid("initial", "field has non-finite values"));
    }
    let stepper = Stepper::new(initial.grid().clone(), *params, config.dt, config.dealias)?;
    let mut pending: Vec<f64> = config.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();

    let mut u = initial.clone();
    let first = DiagnosticsRecord::compute(&u, params, 0.0, 0.0);
    let initial_h_alpha = first.h_alpha_norm();
    let limit = config.blowup_threshold * initial_h_alpha;
    let mut records = vec![first];
    let mut snapshots = Vec::new();
    take_snapshots(&mut pending, &mut snapshots, 0.0, &u);

    let mut t = 0.0;
    let mut steps = 0usize;
    let mut lp_prev = records[0].lp_theta;
    let mut acc = 0.0;
    let mut status = TerminationStatus::Completed;
    let mut uniform = true;
    let end_tol = 1e-9 * config.dt;

    while config.t_end - t > end_tol {
        let remaining = config.t_end - t;
        let mut h = config.dt.min(remaining);
        let mut next = stepper.step(&u, h)?;
        if let Some(ad) = config.adaptive {
            let mut halvings = 0;
            while halvings < ad.max_halvings && step_residual(&u, &next, h, params) > ad.tolerance {
                h *= 0.5;
                halvings += 1;
                uniform = false;
                next = stepper.step(&u, h)?;
            }
        }
        steps += 1;
        t = if uniform && h == config.dt { steps as f64 * config.dt } else { t + h };
        if config.t_end - t <= end_tol {
            t = config.t_end;
        }
        if !next.is_finite() {
            status = TerminationStatus::Instability;
            break;
        }
        let lp = lp_norm_pow(&next, params.theta());
        acc += 0.5 * h * (lp_prev + lp);
        lp_prev = lp;
        u = next;
        take_snapshots(&mut pending, &mut snapshots, t, &u);

        let h_alpha = (u.norm_sq() + seminorm_sq(&u, params.alpha())).sqrt();
        let blown = h_alpha >= limit;
        let done = config.t_end - t <= end_tol;
        if blown || done || steps.is_multiple_of(config.record_stride) {
            let mut rec = DiagnosticsRecord::compute(&u, params, t, acc);
            rec.attach_residuals(records.last().expect("initial record"), params)?;
            let finite = rec.energy.is_finite() && rec.h_alpha_sq.is_finite();
            records.push(rec);
            if !finite {
                status = TerminationStatus::Instability;
                break;
            }
        }
        if blown {
            status = TerminationStatus::BlowupDetected;
            break;
        }
    }
    Ok(Trajectory { records, snapshots, status, steps, initial_h_alpha, final_field: u })
}

fn take_snapshots(pending: &mut Vec<f64>, out: &mut Vec<(f64, Field)>, t: f64, u: &Field) {
    while let Some(&target) = pending.last() {
        if t + 1e-9 * target.abs().max(1.0) >= target {
            out.push((t, u.clone()));
            pending.pop();
        } else {
            break;
        }
    }
}

/// Relative mass-identity residual across one step.
fn step_residual(before: &Field, after: &Field, h: f64, params: &ModelParams) -> f64 {
    let a = params.a();
    let hs = seminorm_sq(before, params.s()) + seminorm_sq(after, params.s());
    let r = (after.norm_sq() - before.norm_sq()) / h + a * hs;
    let scale = a * hs + f64::MIN_POSITIVE;
    r.abs() / scale
}

/// Steps to `t_end` with a fixed step and no diagnostics.
pub fn integrate_to(initial: &Field, params: &ModelParams, dt: f64, t_end: f64, dealias: bool) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    let stepper = Stepper::new(initial.grid().clone(), *params, dt, dealias)?;
    let n = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut u = initial.clone();
    let mut t = 0.0;
    for k in 0..n {
        let h = if k + 1 == n { t_end - t } else { dt };
        u = stepper.step(&u, h)?;
        t = (k + 1) as f64 * dt;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converged,
    /// Successive differences did not shrink monotonically.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    /// `‖u_{dt_k} - u_{dt_{k+1}}‖_{L²}` at `t_end`.
    pub differences: Vec<f64>,
    /// Order between each consecutive pair of differences.
    pub pairwise_orders: Vec<f64>,
    /// Least-squares slope of `log difference` against `log dt`.
    pub order: f64,
    pub status: ConvergenceStatus,
}

/// Observed temporal order from successive refinements.
///
/// Solutions for consecutive step sizes are differenced, which cancels the
/// unknown exact solution: `‖u_h - u_{h/r}‖ ≈ C h^q (1 - r^{-q})`.
pub fn convergence_study(
    initial: &Field,
    params: &ModelParams,
    dts: &[f64],
    t_end: f64,
    dealias: bool,
) -> Result<ConvergenceReport> {
    if dts.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: dts.len() });
    }
    if dts.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::NotDecreasing);
    }
    if let Some(&bad) = dts.iter().find(|h| !(**h > 0.0)) {
        return Err(Error::NonPositiveStep(bad));
    }
    let runs = par::map_collect(dts, |&dt| integrate_to(initial, params, dt, t_end, dealias));
    let fields = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let differences = fields
        .windows(2)
        .map(|w| w[0].distance(&w[1]))
        .collect::<Result<Vec<_>>>()?;
    let pairwise_orders = differences
        .windows(2)
        .zip(dts.windows(2))
        .map(|(d, h)| (d[0] / d[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    let xs: Vec<f64> = dts[..differences.len()].iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = differences.iter().map(|d| d.ln()).collect();
    let order = slope(&xs, &ys);
    let monotone = differences.windows(2).all(|w| w[1] < w[0]) && differences.iter().all(|d| *d > 0.0);
    Ok(ConvergenceReport {
        dts: dts.to_vec(),
        differences,
        pairwise_orders,
        order,
        status: if monotone { ConvergenceStatus::Converged } else { ConvergenceStatus::Inconclusive },
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
