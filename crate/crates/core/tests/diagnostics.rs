use std::f64::consts::PI;

use ndarray::Array2;
use proptest::prelude::*;

use stefan_core::diagnostics::natural::index_pairs;
use stefan_core::diagnostics::weights::{outer_weight_value, solve_phase_weight};
use stefan_core::diagnostics::{cutoff, fit_decay_rate, interior_sobolev_norm, solve_weights, BootstrapFlags};
use stefan_core::grid::{Phase, PolarGrid};
use stefan_core::oracles::annulus_harmonic_oracle;
use stefan_core::spectral::SpectralConstants;
use stefan_core::StefanError;

fn constants() -> SpectralConstants {
    let mut c = SpectralConstants::from_eigenvalues(5.78, 9.75, 1.85, 0.1);
    c.c1_minus = -0.3;
    c.c1_plus = 0.02;
    c
}

#[test]
fn constant_interface_data_give_closed_form_weights() {
    let c = constants();
    let (t, dn) = (0.4, 2.0);
    let gm = PolarGrid::disc(1.0, 16, 32);
    let gp = PolarGrid::annulus(1.0, 2.0, 16, 32);
    let w = solve_weights([&gm, &gp], [&[dn; 32], &[dn; 32]], t, &c).unwrap();
    let inner = ((-c.lambda1 + c.eta) * t).exp() / dn;
    assert!(w.minus.iter().all(|v| (v - inner).abs() < 1e-12));
    let outer = outer_weight_value(t, &c).unwrap();
    assert!((outer - ((-c.lambda1 + c.lambda1_plus + c.eta) * t).exp() / 0.02).abs() < 1e-9);
    let exact = annulus_harmonic_oracle(0, inner, outer, 1.0, 2.0).unwrap();
    for i in 0..gp.n_r() {
        for v in w.plus.row(i) {
            assert!((v - exact.eval(gp.r[i])).abs() < 1e-12 * outer, "{v}");
        }
    }
    let [lo_m, hi_m, lo_p, hi_p] = w.extrema();
    assert!(lo_m <= hi_m && lo_p < hi_p && lo_p > 0.0);
}

#[test]
fn weight_needs_a_positive_normal_derivative() {
    let g = PolarGrid::disc(1.0, 8, 32);
    let mut dn = vec![1.0; 32];
    dn[5] = 0.0;
    match solve_phase_weight(&g, &dn, 0.0, &constants()) {
        Err(StefanError::WeightUndefined { phase, min_dnq }) => {
            assert_eq!(phase, Phase::Minus);
            assert_eq!(min_dnq, 0.0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn outer_weight_needs_a_plus_projection() {
    let mut c = constants();
    c.c1_plus = 0.0;
    assert!(matches!(outer_weight_value(0.1, &c), Err(StefanError::DegenerateData(_))));
}

#[test]
fn disc_sobolev_norms_of_a_paraboloid() {
    // q = 1 − r²: ‖q‖² = π/3, ‖∇q‖² = 2π, ‖∇²q‖² = 8π
    let g = PolarGrid::disc(1.0, 64, 32);
    let q = Array2::from_shape_fn(g.shape(), |(i, _)| 1.0 - g.r[i] * g.r[i]);
    let n0 = interior_sobolev_norm(&g, &q, 0.0, false).unwrap();
    let n1 = interior_sobolev_norm(&g, &q, 1.0, false).unwrap();
    let n2 = interior_sobolev_norm(&g, &q, 2.0, false).unwrap();
    assert!((n0 * n0 - PI / 3.0).abs() < 1e-6, "{n0}");
    assert!((n1 * n1 - 7.0 * PI / 3.0).abs() < 1e-6, "{n1}");
    assert!((n2 * n2 - 31.0 * PI / 3.0).abs() < 1e-5, "{n2}");
}

#[test]
fn fractional_orders_need_the_surrogate() {
    let g = PolarGrid::disc(1.0, 8, 32);
    let q = g.zeros();
    assert!(matches!(
        interior_sobolev_norm(&g, &q, 2.5, false),
        Err(StefanError::UnsupportedOrder { .. })
    ));
    assert_eq!(interior_sobolev_norm(&g, &q, 2.5, true).unwrap(), 0.0);
    assert!(matches!(interior_sobolev_norm(&g, &Array2::zeros((3, 3)), 0.0, false), Err(StefanError::Shape(_))));
}

#[test]
fn cutoff_is_one_near_boundaries_and_zero_inside() {
    let g = PolarGrid::annulus(1.0, 2.0, 64, 32);
    let m = cutoff(&g, 0.1);
    for i in 0..g.n_r() {
        let d = g.boundary_distance(i);
        let v = m[[i, 0]];
        assert!((0.0..=1.0).contains(&v));
        if d <= 0.1 {
            assert_eq!(v, 1.0);
        }
        if d >= 0.2 {
            assert_eq!(v, 0.0);
        }
    }
}

#[test]
fn index_pairs_respect_the_parabolic_cap() {
    let pairs = index_pairs(4);
    assert_eq!(pairs.len(), 9);
    assert!(pairs.iter().all(|(a, b)| a + 2 * b <= 4));
    assert!(index_pairs(-1).is_empty());
}

#[test]
fn flags_round_trip_through_values() {
    let v = [true, false, true, true, false, true, true];
    let f = BootstrapFlags::from_values(v);
    assert_eq!(f.values(), v);
    assert!(!f.all());
    assert!(BootstrapFlags::from_values([true; 7]).all());
    assert_eq!(BootstrapFlags::NAMES.len(), 7);
}

#[test]
fn decay_fit_needs_two_points() {
    assert_eq!(fit_decay_rate(&[0.0, 1.0], &[1.0, 0.5], 0.5, 2.0), None);
    assert_eq!(fit_decay_rate(&[0.0, 1.0], &[1.0, -0.5], 0.0, 2.0), None);
}

proptest! {
    #[test]
    fn decay_fit_recovers_exponentials(mu in -3.0f64..20.0, c in 0.01f64..100.0) {
        let ts: Vec<f64> = (0..50).map(|k| 0.02 * k as f64).collect();
        let xs: Vec<f64> = ts.iter().map(|t| c * (-mu * t).exp()).collect();
        let fit = fit_decay_rate(&ts, &xs, 0.2, 0.8).unwrap();
        prop_assert!((fit - mu).abs() < 1e-9 * mu.abs().max(1.0));
    }

    #[test]
    fn minus_weight_obeys_the_maximum_principle(amps in proptest::collection::vec(-0.4f64..0.4, 4), t in 0.0f64..1.0) {
        let g = PolarGrid::disc(1.0, 16, 32);
        let dn: Vec<f64> = (0..32)
            .map(|j| 1.0 + amps.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * g.theta(j)).cos()).sum::<f64>() / 2.0)
            .collect();
        let c = constants();
        let w = solve_phase_weight(&g, &dn, t, &c).unwrap();
        let f = ((-c.lambda1 + c.eta) * t).exp();
        let data: Vec<f64> = dn.iter().map(|d| f / d).collect();
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(w.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    }
}
