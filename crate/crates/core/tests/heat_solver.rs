use ndarray::Array2;
use proptest::prelude::*;

use stefan_core::ale::{compute_map_data, solve_harmonic_extension, AleMapData};
use stefan_core::geometry::{FourierMode, HeightState, ReferenceGeometry};
use stefan_core::grid::PolarGrid;
use stefan_core::heat::{apply_boundary_conditions, heat_rhs, outer_flux_residual, HeatStepper, PhaseField};
use stefan_core::spectral::{first_eigenpair, OuterCondition};

#[test]
fn disc_eigenvector_decays_by_the_implicit_factor() {
    let g = PolarGrid::disc(1.0, 32, 16);
    let pair = first_eigenpair(&g, OuterCondition::Dirichlet).unwrap();
    let map = AleMapData::identity(&g);
    let dt = 1e-3;
    let stepper = HeatStepper::new(&g, dt).unwrap();
    let mut f = PhaseField::new(&g, pair.function.clone(), &map, 0.0).unwrap();
    let n0 = g.l2_norm(&f.q);
    for k in 0..5 {
        f = stepper.step(&g, &f, &map, k).unwrap();
    }
    let factor = (g.l2_norm(&f.q) / n0).powf(0.2);
    assert!((factor - 1.0 / (1.0 + pair.value * dt)).abs() < 1e-9, "{factor}");
    assert!((f.t - 5.0 * dt).abs() < 1e-15);
}

#[test]
fn annulus_step_keeps_the_outer_wall_insulated() {
    let n = 32;
    let g = PolarGrid::annulus(1.0, 2.0, 24, n);
    let geom = ReferenceGeometry::circle(1.0, 2.0, n).unwrap();
    let h = HeightState::from_modes(&[FourierMode::cos(2, 0.02)], 8);
    let disp = solve_harmonic_extension(&geom, &g, &h, None).unwrap();
    let map = compute_map_data(&g, &disp, [g.zeros(), g.zeros()], 0.0).unwrap();
    let q0 = Array2::from_shape_fn(g.shape(), |(i, j)| (g.r[i] - 1.0) * (1.0 + 0.3 * (2.0 * g.theta(j)).cos()));
    let q0 = apply_boundary_conditions(&g, &q0, &map);
    let stepper = HeatStepper::new(&g, 1e-3).unwrap();
    let f = stepper.step(&g, &PhaseField::new(&g, q0, &map, 0.0).unwrap(), &map, 0).unwrap();
    let resid = outer_flux_residual(&g, &f.q, &map);
    assert!(resid.iter().all(|r| r.abs() < 1e-10), "{:?}", resid.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    assert!(f.q.row(g.gamma_row()).iter().all(|&v| v == 0.0));
}

#[test]
fn right_hand_side_vanishes_on_the_interface() {
    let g = PolarGrid::disc(1.0, 16, 16);
    let q = Array2::from_shape_fn(g.shape(), |(i, _)| 1.0 - g.r[i].powi(2));
    let rhs = heat_rhs(&g, &q, &AleMapData::identity(&g));
    assert!(rhs.row(g.gamma_row()).iter().all(|&v| v == 0.0));
    // Δ(1 − r²) = −4 away from Γ
    for i in 0..g.gamma_row() {
        assert!((rhs[[i, 3]] + 4.0).abs() < 1e-9);
    }
}

#[test]
fn nonpositive_step_is_rejected() {
    let g = PolarGrid::disc(1.0, 8, 8);
    assert!(HeatStepper::new(&g, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn step_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = PolarGrid::annulus(1.0, 2.0, 12, 16);
        let map = AleMapData::identity(&g);
        let st = HeatStepper::new(&g, 1e-3).unwrap();
        let u = Array2::from_shape_fn(g.shape(), |(i, j)| (g.r[i] - 1.0) * (1.0 + (g.theta(j)).sin()));
        let v = Array2::from_shape_fn(g.shape(), |(i, _)| (g.r[i] - 1.0) * (3.0 - g.r[i]));
        let (u, v) = (apply_boundary_conditions(&g, &u, &map), apply_boundary_conditions(&g, &v, &map));
        let run = |q: Array2<f64>| st.step(&g, &PhaseField::new(&g, q, &map, 0.0).unwrap(), &map, 0).unwrap().q;
        let lhs = run(&u * a + &v * b);
        let rhs = run(u) * a + run(v) * b;
        let diff = lhs.iter().zip(rhs.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(diff < 1e-11);
    }
}
