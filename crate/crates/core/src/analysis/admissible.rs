//! Strichartz exponent calculus.
//!
//! A pair `(q, r)` with `q, r >= 2` is admissible when either
//!
//! 1. `q >= (4d+2)/(2d-1)` and `2/q + (2d-1)/r <= d - 1/2`, or
//! 2. `2 <= (4d+2)/(2d-1)` and `2/q + (2d-1)/r < d - 1/2`.
//!
//! Both clauses are evaluated as written. The first condition of clause 2
//! holds for every `d >= 1`, so clause 2 reduces to the strict inequality;
//! a condition on `q` was presumably meant there.

use serde::Serialize;

use crate::params::ModelParams;

const EPS: f64 = 1e-12;

fn le(a: f64, b: f64) -> bool {
    a <= b + EPS * b.abs().max(1.0)
}

fn lt(a: f64, b: f64) -> bool {
    a < b - EPS * b.abs().max(1.0)
}

fn inv(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `q` above the endpoint, non-strict inequality.
    Endpoint,
    /// Strict inequality.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrichartzExponents {
    pub d: usize,
    pub gamma: f64,
    pub q: f64,
    pub r: f64,
    /// Hölder conjugates `(q̃', r̃')` of the dual pair with `q̃ = q` and
    /// `2/q̃ + d/r̃ = d/2 + γ`; `None` when no such `r̃ >= 1` exists.
    pub dual: Option<(f64, f64)>,
    pub admissible: bool,
    pub clause: Option<Clause>,
    /// Equality in `2/q + (2d-1)/r <= d - 1/2`.
    pub boundary: bool,
    /// `2/q + d/r = d/2 - γ`.
    pub scaling_ok: bool,
}

impl StrichartzExponents {
    pub fn describe(&self) -> &'static str {
        match (self.admissible, self.boundary) {
            (true, true) => "admissible (boundary)",
            (true, false) => "admissible",
            _ => "not admissible",
        }
    }
}

/// `(4d+2)/(2d-1)`.
pub fn endpoint_q(d: usize) -> f64 {
    let d = d as f64;
    (4.0 * d + 2.0) / (2.0 * d - 1.0)
}

pub fn check_admissible(q: f64, r: f64, d: usize, gamma: f64) -> StrichartzExponents {
    let df = d as f64;
    let in_range = q >= 2.0 && r >= 2.0 && !q.is_nan() && !r.is_nan() && d >= 1;
    let lhs = 2.0 * inv(q) + (2.0 * df - 1.0) * inv(r);
    let rhs = df - 0.5;
    let q_end = endpoint_q(d);

    let clause = if !in_range {
        None
    } else if q >= q_end && le(lhs, rhs) {
        Some(Clause::Endpoint)
    } else if 2.0 <= q_end && lt(lhs, rhs) {
        Some(Clause::Strict)
    } else {
        None
    };
    let admissible = clause.is_some();
    let boundary = admissible && le(lhs, rhs) && !lt(lhs, rhs);

    let scaling = 2.0 * inv(q) + df * inv(r);
    let scaling_ok = (scaling - (df / 2.0 - gamma)).abs() <= EPS * df.max(1.0);

    let inv_r_dual = (df / 2.0 + gamma - 2.0 * inv(q)) / df;
    let dual = if in_range && (0.0..=1.0).contains(&inv_r_dual) {
        let q_conj = 1.0 / (1.0 - inv(q));
        let r_conj = 1.0 / (1.0 - inv_r_dual);
        Some((q_conj, r_conj))
    } else {
        None
    };

    StrichartzExponents { d, gamma, q, r, dual, admissible, clause, boundary, scaling_ok }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponents {
    /// `4α/d + 2`.
    pub theta: f64,
    /// `4α(1+p)/(d(p-1))`, which equals `θ` for `p = 1 + 4α/d`.
    pub q: f64,
    /// From `1/q' = 1/q + (p-1)/θ`, i.e. `q' = θ/p`.
    pub q_prime: f64,
}

pub fn critical_exponents(params: &ModelParams) -> CriticalExponents {
    let (alpha, d, p) = (params.alpha(), params.d() as f64, params.p());
    let theta = 4.0 * alpha / d + 2.0;
    let q = 4.0 * alpha * (1.0 + p) / (d * (p - 1.0));
    let q_prime = 1.0 / (1.0 / q + (p - 1.0) / theta);
    CriticalExponents { theta, q, q_prime }
}
