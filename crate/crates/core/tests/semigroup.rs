mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use fnls_core::oracle::dense_oracle_semigroup;
use fnls_core::semigroup::{apply_semigroup, fractional_laplacian, semigroup_compose_check};
use fnls_core::{Field, Grid, ModelParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use common::{random_field, rng};

fn plane_wave(grid: &Arc<Grid>, k: i64, c: Complex64) -> Field {
    let dk = 2.0 * PI / grid.box_length();
    Field::from_fn(grid.clone(), move |x| c * Complex64::from_polar(1.0, dk * k as f64 * x[0]))
}

#[test]
fn single_mode_decay_and_phase_are_exact() {
    let grid = Arc::new(Grid::new(32, 2.0 * PI, 1).unwrap());
    let p = ModelParams::new(1, 0.8, 1.0, 1.0).unwrap();
    let u = plane_wave(&grid, 1, Complex64::new(1.0, 0.0));
    let v = apply_semigroup(&u, 1.0, &p).unwrap();
    let ratio = v.spectrum()[1] / u.spectrum()[1];
    assert!((ratio.norm() - (-1.0f64).exp()).abs() <= 1e-12);
    assert!((ratio.arg() - (-1.0)).abs() <= 1e-12);
}

#[test]
fn spectral_flow_matches_dense_matrix_exponential() {
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    for n in [8, 16] {
        let grid = Arc::new(Grid::new(n, 5.0, 1).unwrap());
        for alpha in [0.6, 0.8, 0.95] {
            for s in [0.0, 0.5, 1.0] {
                for a in [0.5, 2.0] {
                    for t in [0.3, 1.0] {
                        let p = ModelParams::new(1, alpha, s, a).unwrap();
                        let u = random_field(&grid, &mut r);
                        let fast = apply_semigroup(&u, t, &p).unwrap();
                        let dense = dense_oracle_semigroup(&u, t, &p).unwrap();
                        let rel = fast.distance(&dense).unwrap() / dense.norm_sq().sqrt();
                        worst = worst.max(rel);
                    }
                }
            }
        }
    }
    assert!(worst <= 1e-10, "worst relative error {worst:e}");
}

#[test]
fn composition_law_on_random_triples() {
    let mut r = rng(5);
    let grid = Arc::new(Grid::new(64, 10.0, 1).unwrap());
    let p = ModelParams::new(1, 0.8, 0.5, 0.7).unwrap();
    for _ in 0..50 {
        let u = random_field(&grid, &mut r);
        let t1 = r.random_range(0.0..2.0);
        let t2 = r.random_range(0.0..2.0);
        let rel = semigroup_compose_check(&u, t1, t2, &p).unwrap() / u.norm_sq().sqrt();
        assert!(rel <= 1e-12, "t1={t1} t2={t2}: {rel:e}");
    }
}

#[test]
fn fractional_laplacian_powers_compose() {
    let mut r = rng(2);
    let grid = Arc::new(Grid::new(16, 7.0, 2).unwrap());
    let u = random_field(&grid, &mut r);
    let once = fractional_laplacian(&u, 0.7);
    let twice = fractional_laplacian(&fractional_laplacian(&u, 0.3), 0.4);
    assert!(once.distance(&twice).unwrap() <= 1e-10 * once.norm_sq().sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn damped_flow_is_contractive(seed in any::<u64>(), alpha in 0.5f64..1.0, s in 0.0f64..1.5, a in 0.0f64..3.0, t in 0.0f64..3.0) {
        let grid = Arc::new(Grid::new(32, 8.0, 1).unwrap());
        let p = ModelParams::new(1, alpha, s, a).unwrap();
        let u = random_field(&grid, &mut rng(seed));
        let v = apply_semigroup(&u, t, &p).unwrap();
        prop_assert!(v.norm_sq() <= u.norm_sq() * (1.0 + 1e-13));
    }

    #[test]
    fn undamped_flow_is_unitary(seed in any::<u64>(), alpha in 0.5f64..1.0, t in 0.0f64..10.0) {
        let grid = Arc::new(Grid::new(16, 6.0, 2).unwrap());
        let p = ModelParams::new(2, alpha, 0.5, 0.0).unwrap();
        let u = random_field(&grid, &mut rng(seed));
        let v = apply_semigroup(&u, t, &p).unwrap();
        prop_assert!(common::rel_err(v.norm_sq(), u.norm_sq()) <= 1e-12);
    }

    #[test]
    fn damping_never_touches_the_zero_mode_for_positive_s(seed in any::<u64>(), s in 0.1f64..1.5, t in 0.0f64..5.0) {
        let grid = Arc::new(Grid::new(16, 6.0, 1).unwrap());
        let p = ModelParams::new(1, 0.8, s, 2.0).unwrap();
        let u = random_field(&grid, &mut rng(seed));
        let v = apply_semigroup(&u, t, &p).unwrap();
        prop_assert!((v.spectrum()[0] - u.spectrum()[0]).norm() <= 1e-12 * u.spectrum()[0].norm().max(1.0));
    }
}
