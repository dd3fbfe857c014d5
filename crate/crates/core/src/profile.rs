//! Initial data on the grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::grid::Grid;

/// Default bound on the fraction of squared mass allowed in the outer band
/// of the box.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `exp(-r²/(2w²))`.
    Gaussian,
    /// `exp(-(r²/(2w²))^order)`; `order = 1` is the Gaussian.
    SuperGaussian { order: f64 },
    /// Plane wave `exp(i ξ_k·x)` for integer mode `k`.
    SingleMode { mode: Vec<i64> },
    /// `exp(-(r - radius)²/(2w²))`, two dimensions only.
    Ring { radius: f64 },
}

/// A profile family with amplitude and width, centred in the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    pub kind: ProfileKind,
    pub amplitude: Complex64,
    pub width: f64,
}

impl InitialProfile {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self { kind: ProfileKind::Gaussian, amplitude: Complex64::new(amplitude, 0.0), width }
    }

    pub fn single_mode(amplitude: Complex64, mode: Vec<i64>) -> Self {
        Self { kind: ProfileKind::SingleMode { mode }, amplitude, width: 1.0 }
    }

    pub fn with_amplitude(&self, amplitude: Complex64) -> Self {
        Self { amplitude, ..self.clone() }
    }

    /// Radially symmetric families are centred at the origin.
    pub fn is_radial(&self) -> bool {
        !matches!(self.kind, ProfileKind::SingleMode { .. })
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.amplitude.re.is_finite() && self.amplitude.im.is_finite()) {
            return Err(invalid("amplitude", "must be finite"));
        }
        if self.is_radial() && !(self.width.is_finite() && self.width > 0.0) {
            return Err(invalid("width", format!("must be positive, got {}", self.width)));
        }
        match &self.kind {
            ProfileKind::SuperGaussian { order } if !(order.is_finite() && *order > 0.0) => {
                Err(invalid("order", format!("must be positive, got {order}")))
            }
            ProfileKind::Ring { radius } => {
                if grid.dim() != 2 {
                    Err(invalid("kind", "ring profiles need d = 2"))
                } else if !(radius.is_finite() && *radius >= 0.0) {
                    Err(invalid("radius", format!("must be >= 0, got {radius}")))
                } else {
                    Ok(())
                }
            }
            ProfileKind::SingleMode { mode } if mode.len() != grid.dim() => {
                Err(invalid("mode", format!("needs {} components, got {}", grid.dim(), mode.len())))
            }
            _ => Ok(()),
        }
    }

    /// Value at a point, before the amplitude factor.
    fn shape(&self, x: &[f64], grid: &Grid) -> Complex64 {
        let r_sq: f64 = x.iter().map(|v| v * v).sum();
        let w2 = 2.0 * self.width * self.width;
        match &self.kind {
            ProfileKind::Gaussian => Complex64::new((-r_sq / w2).exp(), 0.0),
            ProfileKind::SuperGaussian { order } => Complex64::new((-(r_sq / w2).powf(*order)).exp(), 0.0),
            ProfileKind::Ring { radius } => {
                let dr = r_sq.sqrt() - radius;
                Complex64::new((-dr * dr / w2).exp(), 0.0)
            }
            ProfileKind::SingleMode { mode } => {
                let dk = 2.0 * PI / grid.box_length();
                let phase: f64 = x.iter().zip(mode).map(|(xi, k)| dk * *k as f64 * xi).sum();
                Complex64::from_polar(1.0, phase)
            }
        }
    }
}

/// Samples a profile at the grid nodes.
///
/// Localised profiles are rejected when more than `truncation_tol` of their
/// squared mass sits in the outer band `max_i |x_i| >= 3L/8`.
pub fn sample_profile(profile: &InitialProfile, grid: &Arc<Grid>, truncation_tol: f64) -> Result<Field> {
    profile.validate(grid)?;
    let amp = profile.amplitude;
    let g = grid.clone();
    let field = Field::from_fn(grid.clone(), |x| amp * profile.shape(x, &g));
    if profile.is_radial() && amp != Complex64::new(0.0, 0.0) {
        let fraction = boundary_mass_fraction(&field);
        if fraction > truncation_tol {
            return Err(Error::ProfileTruncated { fraction, tolerance: truncation_tol });
        }
    }
    Ok(field)
}

/// Fraction of squared mass in the outer band `max_i |x_i| >= 3L/8`.
pub fn boundary_mass_fraction(field: &Field) -> f64 {
    let grid = field.grid();
    let edge = 0.375 * grid.box_length();
    let (mut band, mut total) = (0.0, 0.0);
    for (i, v) in field.values().iter().enumerate() {
        let m = v.norm_sqr();
        total += m;
        if grid.position(i).iter().any(|x| x.abs() >= edge) {
            band += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        band / total
    }
}

/// Fraction of spectral mass in the outer band `max_i |k_i| >= 3n/8`;
/// large values mean the grid does not resolve the field.
pub fn spectral_tail_fraction(field: &Field) -> f64 {
    let grid = field.grid();
    let cut = 3 * grid.n_per_dim() as u64;
    let modes = grid.mode_indices();
    let (mut band, mut total) = (0.0, 0.0);
    for (i, v) in field.spectrum().iter().enumerate() {
        let m = v.norm_sqr();
        total += m;
        if grid.multi_index(i).into_iter().any(|j| 8 * modes[j].unsigned_abs() >= cut) {
            band += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        band / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_mass() {
        let grid = Arc::new(Grid::new(16, 5.0, 2).unwrap());
        let c = Complex64::new(0.6, -0.8) * 1.5;
        let f = sample_profile(&InitialProfile::single_mode(c, vec![2, -3]), &grid, DEFAULT_TRUNCATION_TOL).unwrap();
        let expected = c.norm_sqr() * grid.volume();
        assert!((f.norm_sq() - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn zero_amplitude_is_zero_field() {
        let grid = Arc::new(Grid::new(32, 4.0, 1).unwrap());
        // even a profile far too wide for the box is fine at zero amplitude
        let f = sample_profile(&InitialProfile::gaussian(0.0, 10.0), &grid, DEFAULT_TRUNCATION_TOL).unwrap();
        assert!(f.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn wide_profile_is_rejected() {
        let grid = Arc::new(Grid::new(64, 8.0, 1).unwrap());
        let err = sample_profile(&InitialProfile::gaussian(1.0, 2.0), &grid, DEFAULT_TRUNCATION_TOL).unwrap_err();
        assert!(matches!(err, Error::ProfileTruncated { .. }));
    }

    #[test]
    fn radial_profiles_are_reflection_symmetric() {
        let grid = Arc::new(Grid::new(32, 24.0, 2).unwrap());
        let kinds = [
            ProfileKind::Gaussian,
            ProfileKind::SuperGaussian { order: 2.0 },
            ProfileKind::Ring { radius: 3.0 },
        ];
        for kind in kinds {
            let p = InitialProfile { kind, amplitude: Complex64::new(1.3, 0.2), width: 1.1 };
            let f = sample_profile(&p, &grid, 1e-6).unwrap();
            assert_eq!(f.values(), f.reflected().values());
        }
    }

    #[test]
    fn ring_needs_two_dimensions() {
        let grid = Arc::new(Grid::new(32, 24.0, 1).unwrap());
        let p = InitialProfile { kind: ProfileKind::Ring { radius: 2.0 }, amplitude: Complex64::new(1.0, 0.0), width: 1.0 };
        assert!(sample_profile(&p, &grid, 1e-6).is_err());
    }
}
