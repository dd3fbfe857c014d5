//! L¹ norm of the dissipative kernel
//! `H_{a,s}(t, x) = ∫ e^{-ixξ} e^{-a t |ξ|^{2s}} dξ` in one dimension.
//!
//! The kernel is evaluated by Gauss–Legendre quadrature of its cosine
//! transform on `[0, R]`, and the part beyond `R` is added from the
//! large-`|x|` expansion
//! `f(y) ~ (1/π) Σ_k (-1)^{k+1} Γ(kβ+1)/k! sin(kπβ/2) y^{-kβ-1}` (β = 2s)
//! of the unit-scale kernel. `R` doubles with each refinement level until
//! two successive levels agree.
//!
//! No `(2π)^{-1}` factor is included, so for `0 < s <= 1` (positive kernel)
//! the exact value is `2π` for every `(a, t)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::par;
use crate::quadrature::PanelRule;

/// Quadrature controls. Lengths are in units of the kernel scale
/// `ℓ = (a t)^{1/(2s)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelQuadrature {
    pub initial_radius: f64,
    pub max_levels: usize,
    pub tolerance: f64,
    pub panel_points: usize,
    pub x_panel_width: f64,
    /// Frequencies are cut where `a t |ξ|^{2s}` reaches this value.
    pub cutoff_exponent: f64,
}

impl Default for KernelQuadrature {
    fn default() -> Self {
        Self {
            initial_radius: 4.0,
            max_levels: 5,
            tolerance: 1e-6,
            panel_points: 16,
            x_panel_width: 0.25,
            cutoff_exponent: 40.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub s: f64,
    pub a: f64,
    pub t: f64,
    /// `‖H_{a,s}(t,·)‖_{L¹}` without the `(2π)^{-1}` normalisation.
    pub value: f64,
    /// `value / 2π`.
    pub normalized: f64,
    /// `(radius, value)` for each level computed.
    pub levels: Vec<(f64, f64)>,
    /// Relative change between the last two levels.
    pub rel_change: f64,
}

pub fn kernel_l1(s: f64, t: f64, a: f64, spec: &KernelQuadrature) -> Result<KernelReport> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(invalid("s", format!("kernel order must be positive, got {s}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be positive, got {t}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("must be positive, got {a}")));
    }
    if spec.max_levels < 2 {
        return Err(invalid("max_levels", "need at least two levels to judge stability"));
    }
    let kernel = Kernel::new(s, a * t, spec);
    let mut levels = Vec::new();
    let mut radius = spec.initial_radius * kernel.scale;
    let mut rel_change = f64::INFINITY;
    for _ in 0..spec.max_levels {
        let value = kernel.l1_norm(radius);
        if let Some(&(_, prev)) = levels.last() {
            let prev: f64 = prev;
            rel_change = (value - prev).abs() / value.abs();
        }
        levels.push((radius, value));
        if rel_change <= spec.tolerance {
            return Ok(KernelReport {
                s,
                a,
                t,
                value,
                normalized: value / (2.0 * PI),
                levels,
                rel_change,
            });
        }
        radius *= 2.0;
    }
    Err(Error::KernelUnstable { rel_change, tolerance: spec.tolerance })
}

struct Kernel {
    beta: f64,
    /// `a t`.
    rate: f64,
    scale: f64,
    /// Substitution `ξ = η^power` that smooths `ξ^{2s}` near zero.
    power: i32,
    eta_max: f64,
    rule: PanelRule,
    x_panel: f64,
}

impl Kernel {
    fn new(s: f64, rate: f64, spec: &KernelQuadrature) -> Self {
        let beta = 2.0 * s;
        let scale = rate.powf(1.0 / beta);
        let power = if beta < 1.0 { (1.0 / beta).ceil() as i32 } else { 1 };
        let xi_max = (spec.cutoff_exponent / rate).powf(1.0 / beta);
        Self {
            beta,
            rate,
            scale,
            power,
            eta_max: xi_max.powf(1.0 / power as f64),
            rule: PanelRule::new(spec.panel_points),
            x_panel: spec.x_panel_width * scale,
        }
    }

    /// `H(x) = 2 ∫_0^∞ cos(xξ) e^{-rate ξ^β} dξ`.
    fn eval(&self, x: f64) -> f64 {
        let m = self.power;
        let mf = m as f64;
        let integrand = |eta: f64| {
            let xi = eta.powi(m);
            let jac = if m == 1 { 1.0 } else { mf * eta.powi(m - 1) };
            (x * xi).cos() * (-self.rate * xi.powf(self.beta)).exp() * jac
        };
        let mut total = 0.0;
        let mut lo = 0.0;
        let floor = self.eta_max * 1e-14;
        let cap = self.eta_max / 64.0;
        while lo < self.eta_max {
            // geometric grading near zero; at most two radians of phase per panel
            let grade = lo.max(floor);
            let slope = x * mf * (lo + grade).powi(m - 1);
            let osc = if slope > 0.0 { 2.0 / slope } else { f64::INFINITY };
            let width = grade.min(osc).min(cap).min(self.eta_max - lo);
            let hi = lo + width;
            total += self.rule.integrate(lo, hi, integrand);
            lo = hi;
        }
        2.0 * total
    }

    /// `∫_{-R}^{R} |H| + 2 ∫_R^∞ |H|` with the tail from the asymptotic series.
    fn l1_norm(&self, radius: f64) -> f64 {
        let panels = (radius / self.x_panel).ceil() as usize;
        let width = radius / panels as f64;
        let idx: Vec<usize> = (0..panels).collect();
        let parts = par::map_collect(&idx, |&i| {
            let lo = i as f64 * width;
            self.rule.integrate(lo, lo + width, |x| self.eval(x).abs())
        });
        let bulk: f64 = parts.iter().sum();
        2.0 * bulk + 2.0 * 2.0 * PI * self.tail_mass(radius / self.scale).abs()
    }

    /// `∫_y^∞ f(z) dz` for the unit-scale, unit-mass kernel `f`.
    fn tail_mass(&self, y: f64) -> f64 {
        let beta = self.beta;
        let mut sum = 0.0;
        let mut prev = f64::INFINITY;
        for k in 1..=80 {
            let kf = k as f64;
            let sin = (kf * PI * beta / 2.0).sin();
            let log_mag = ln_gamma(kf * beta + 1.0) - ln_gamma(kf + 1.0) - kf * beta * y.ln() - (kf * beta).ln();
            let mag = log_mag.exp();
            if k > 1 && mag > prev {
                // asymptotic regime: stop before terms grow
                break;
            }
            prev = mag;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let term = sign * sin * mag;
            sum += term;
            if mag < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum / PI
    }
}

/// Lanczos approximation of `ln Γ(x)` for `x > 0`.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
