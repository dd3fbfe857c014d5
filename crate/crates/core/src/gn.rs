//! Empirical Gagliardo–Nirenberg constant for the L²-critical ratio
//!
//! ```text
//! R(u) = ∫|u|^θ / ( ‖(-Δ)^{α/2}u‖² ‖u‖^{4α/d} ),   θ = 4α/d + 2,
//! ```
//!
//! and the energy lower bound `E(u) >= ‖(-Δ)^{α/2}u‖² (½ - C‖u‖^{4α/d})`
//! with `C = A d/(4α+2d)`. The running maximum of `R` over samples is a
//! lower estimate of the sharp constant `A`, so every smallness threshold
//! derived from it is an optimistic (upper) estimate.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::Field;
use crate::functionals::{energy, lp_norm_pow, potential_coefficient, seminorm_sq};
use crate::grid::Grid;
use crate::par;
use crate::params::ModelParams;
use crate::profile::{boundary_mass_fraction, spectral_tail_fraction};

/// Radial shape families used to probe the ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GnFamily {
    Gaussian,
    SuperGaussian { order: f64 },
    /// `sech(z)^power`.
    Sech { power: f64 },
    /// `(1 + z²)^(-power)`, algebraic tails.
    Algebraic { power: f64 },
    /// Annulus of radius `radius_ratio × width` (d = 2 only).
    Ring { radius_ratio: f64 },
}

impl GnFamily {
    pub fn value(&self, r: f64, width: f64) -> f64 {
        let z = r / width;
        match *self {
            GnFamily::Gaussian => (-0.5 * z * z).exp(),
            GnFamily::SuperGaussian { order } => (-(0.5 * z * z).powf(order)).exp(),
            GnFamily::Sech { power } => z.cosh().powf(-power),
            GnFamily::Algebraic { power } => (1.0 + z * z).powf(-power),
            GnFamily::Ring { radius_ratio } => {
                let dz = z - radius_ratio;
                (-0.5 * dz * dz).exp()
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            GnFamily::Gaussian => "gaussian".into(),
            GnFamily::SuperGaussian { order } => format!("super-gaussian(order={order})"),
            GnFamily::Sech { power } => format!("sech(power={power})"),
            GnFamily::Algebraic { power } => format!("algebraic(power={power})"),
            GnFamily::Ring { radius_ratio } => format!("ring(radius_ratio={radius_ratio})"),
        }
    }

    /// Samples `amplitude · shape(|x| / width)` on the grid.
    pub fn sample(&self, grid: &Arc<Grid>, width: f64, amplitude: f64) -> Field {
        let fam = *self;
        Field::from_fn(grid.clone(), move |x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            Complex64::new(amplitude * fam.value(r, width), 0.0)
        })
    }
}

/// Which profiles to sample: every family at every width and amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnSampleSpec {
    pub families: Vec<GnFamily>,
    pub widths: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Samples with more boundary mass or more high-frequency mass than
    /// this are skipped.
    pub truncation_tol: f64,
}

impl GnSampleSpec {
    /// A spread of shapes and widths; `widths` spans `[w_min, w_max]`
    /// geometrically with `n_widths` points.
    pub fn standard(d: usize, w_min: f64, w_max: f64, n_widths: usize) -> Self {
        let mut families = vec![GnFamily::Gaussian];
        for power in [0.5, 0.75, 1.0, 1.5, 2.0] {
            families.push(GnFamily::Sech { power });
        }
        for power in [1.25, 1.5, 2.0, 3.0] {
            families.push(GnFamily::Algebraic { power });
        }
        for order in [0.6, 0.75, 1.5, 3.0] {
            families.push(GnFamily::SuperGaussian { order });
        }
        if d == 2 {
            for ratio in [0.5, 1.0, 2.0] {
                families.push(GnFamily::Ring { radius_ratio: ratio });
            }
        }
        let widths = geometric(w_min, w_max, n_widths);
        Self { families, widths, amplitudes: vec![0.5, 1.0, 2.0], truncation_tol: 1e-8 }
    }

    pub fn len(&self) -> usize {
        self.families.len() * self.widths.len() * self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// The L²-critical ratio, or `None` when the denominator vanishes.
pub fn gn_ratio(field: &Field, params: &ModelParams) -> Option<f64> {
    let grad = seminorm_sq(field, params.alpha());
    let m = field.norm_sq();
    let denom = grad * m.powf(2.0 * params.alpha() / params.d() as f64);
    if !(denom > 0.0 && denom.is_finite()) {
        return None;
    }
    Some(lp_norm_pow(field, params.theta()) / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnConstant {
    pub alpha: f64,
    pub d: usize,
    /// Running maximum of the ratio (lower estimate of the sharp constant).
    pub estimate: f64,
    pub samples: usize,
    pub skipped: usize,
    /// Profile attaining the maximum, e.g. `"sech width=1.2 amplitude=1"`.
    pub maximizer: String,
    /// Running maximum after each accepted sample.
    pub history: Vec<f64>,
}

impl GnConstant {
    /// `C = A d/(4α+2d)` in the energy lower bound.
    pub fn energy_constant(&self, params: &ModelParams) -> f64 {
        self.estimate * potential_coefficient(params)
    }

    /// Empirical smallness threshold on `‖u‖_{L²}` below which
    /// `½ - C‖u‖^{4α/d} > 0`.
    pub fn coercivity_mass(&self, params: &ModelParams) -> f64 {
        let c = self.energy_constant(params);
        (1.0 / (2.0 * c)).powf(params.d() as f64 / (4.0 * params.alpha()))
    }
}

pub fn gn_constant_estimate(params: &ModelParams, grid: &Arc<Grid>, spec: &GnSampleSpec) -> Result<GnConstant> {
    if grid.dim() != params.d() {
        return Err(invalid("grid", "dimension differs from the model"));
    }
    if spec.is_empty() {
        return Err(invalid("gn", "sample specification is empty"));
    }
    let mut jobs = Vec::with_capacity(spec.len());
    for fam in &spec.families {
        for &w in &spec.widths {
            for &amp in &spec.amplitudes {
                jobs.push((*fam, w, amp));
            }
        }
    }
    let ratios = par::map_collect(&jobs, |&(fam, w, amp)| {
        if matches!(fam, GnFamily::Ring { .. }) && grid.dim() != 2 {
            return None;
        }
        let f = fam.sample(grid, w, amp);
        if boundary_mass_fraction(&f) > spec.truncation_tol || spectral_tail_fraction(&f) > spec.truncation_tol {
            return None;
        }
        gn_ratio(&f, params)
    });

    let mut estimate = 0.0;
    let mut maximizer = String::new();
    let mut history = Vec::new();
    let mut skipped = 0;
    for ((fam, w, amp), ratio) in jobs.iter().zip(ratios) {
        match ratio {
            Some(r) => {
                if r > estimate {
                    estimate = r;
                    maximizer = format!("{} width={w} amplitude={amp}", fam.label());
                }
                history.push(estimate);
            }
            None => skipped += 1,
        }
    }
    Ok(GnConstant {
        alpha: params.alpha(),
        d: params.d(),
        estimate,
        samples: history.len(),
        skipped,
        maximizer,
        history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundCheck {
    /// `E(u)`.
    pub lhs: f64,
    /// `‖(-Δ)^{α/2}u‖² (½ - C‖u‖^{4α/d})`.
    pub rhs: f64,
    pub satisfied: bool,
}

pub fn energy_lower_bound_check(field: &Field, params: &ModelParams, gn: &GnConstant) -> LowerBoundCheck {
    let lhs = energy(field, params);
    let grad = seminorm_sq(field, params.alpha());
    let m = field.norm_sq();
    let rhs = grad * (0.5 - gn.energy_constant(params) * m.powf(2.0 * params.alpha() / params.d() as f64));
    let slack = 1e-12 * lhs.abs().max(rhs.abs());
    LowerBoundCheck { lhs, rhs, satisfied: lhs >= rhs - slack }
}
