//! Pseudospectral simulation of the damped L²-critical fractional nonlinear
//! Schrödinger equation
//!
//! ```text
//! i u_t - (-Δ)^α u + |u|^{p-1} u + i a (-Δ)^s u = 0,   p = 1 + 4α/d,
//! ```
//!
//! on a periodic box in one or two dimensions, together with the
//! diagnostics used to probe its dissipation identities, a-priori bounds,
//! global existence and scattering.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod field;
pub mod functionals;
pub mod gn;
pub mod grid;
pub mod integrator;
pub mod kernel;
pub mod oracle;
pub mod par;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod semigroup;

pub use error::{Error, Result};
pub use field::Field;
pub use functionals::DiagnosticsRecord;
pub use grid::Grid;
pub use integrator::{evolve, StepperConfig, TerminationStatus, Trajectory};
pub use params::ModelParams;
pub use profile::{sample_profile, InitialProfile, ProfileKind};
