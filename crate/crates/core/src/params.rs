//! Model parameters and their derived critical exponents.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Physical parameters of the damped fractional NLS
/// `i u_t - (-Δ)^α u + |u|^{p-1} u + i a (-Δ)^s u = 0`.
///
/// The nonlinearity exponent is tied to the L²-critical value
/// `p = 1 + 4α/d`, and `θ = p + 1` is the matching space-time exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    d: usize,
    alpha: f64,
    s: f64,
    a: f64,
    p: f64,
    theta: f64,
}

/// Which global-existence statement (if any) the parameters fall under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// No damping: plain fractional NLS.
    Undamped,
    /// `0 < s < α` with `s + α >= 1`: small-mass global existence.
    SmallMass,
    /// `0 < s < α` with `s + α < 1`: no global statement available.
    WeakDissipation,
    /// `s >= α`: global well-posedness for all data.
    StrongDissipation,
}

impl ModelParams {
    pub fn new(d: usize, alpha: f64, s: f64, a: f64) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", format!("must be positive and finite, got {alpha}")));
        }
        if !(s.is_finite() && s >= 0.0) {
            return Err(invalid("s", format!("must be >= 0, got {s}")));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(invalid("a", format!("must be >= 0, got {a}")));
        }
        let p = 1.0 + 4.0 * alpha / d as f64;
        let theta = 4.0 * alpha / d as f64 + 2.0;
        Ok(Self { d, alpha, s, a, p, theta })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    /// Nonlinearity exponent `1 + 4α/d`.
    pub fn p(&self) -> f64 {
        self.p
    }
    /// Space-time exponent `4α/d + 2`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Copy with a different friction coefficient.
    pub fn with_damping(&self, a: f64) -> Result<Self> {
        Self::new(self.d, self.alpha, self.s, a)
    }

    /// Lower end `d/(2d-1)` of the admissible dispersion interval.
    pub fn alpha_lower_bound(&self) -> f64 {
        let d = self.d as f64;
        d / (2.0 * d - 1.0)
    }

    /// True iff `α ∈ (d/(2d-1), 1)`. Outside this window the solver still
    /// runs but the global-existence results give no guarantee.
    pub fn is_valid(&self) -> bool {
        self.alpha > self.alpha_lower_bound() && self.alpha < 1.0
    }

    pub fn regime(&self) -> Regime {
        if self.a == 0.0 {
            Regime::Undamped
        } else if self.s >= self.alpha {
            Regime::StrongDissipation
        } else if self.s + self.alpha >= 1.0 {
            Regime::SmallMass
        } else {
            Regime::WeakDissipation
        }
    }

    /// Human-readable notes on hypotheses that are not met.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.is_valid() {
            out.push(format!(
                "alpha = {} lies outside ({:.6}, 1); global-existence results do not apply",
                self.alpha,
                self.alpha_lower_bound()
            ));
        }
        if self.d < 2 {
            out.push("d = 1 is an exploration mode; the Strichartz theory assumes d >= 2".into());
        }
        if self.a > 0.0 && self.s < self.alpha && self.s + self.alpha < 1.0 {
            out.push(format!(
                "small-mass global existence hypotheses not met: s + alpha = {} < 1 with s < alpha",
                self.s + self.alpha
            ));
        }
        out
    }
}
