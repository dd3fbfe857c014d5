//! Experiments built on the solver: exponent calculus, scattering defects,
//! damping sweeps, mass-threshold probes, a-priori bounds and identity
//! refinement studies.

pub mod admissible;
pub mod apriori;
pub mod identities;
pub mod scattering;
pub mod sweep;
pub mod threshold;

pub use admissible::{check_admissible, critical_exponents, CriticalExponents, StrichartzExponents};
pub use apriori::{apriori_bounds_check, AprioriReport};
pub use identities::{identity_refinement, IdentityStudy};
pub use scattering::{scattering_defect, scattering_study, ScatteringResult};
pub use sweep::{accumulator_monotonicity, sweep_damping, sweep_damping_with, Outcome, SweepBase, SweepResult};
pub use threshold::{energy_non_increasing, mass_threshold_probe, ThresholdReport, ThresholdStatus};
