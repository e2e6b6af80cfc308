use proptest::prelude::*;

use stefan_core::ale::{analytic_velocity, compute_map_data, solve_harmonic_extension, validate_map, AleMapData};
use stefan_core::geometry::{FourierMode, HeightState, ReferenceGeometry};
use stefan_core::grid::PolarGrid;
use stefan_core::mollifier::Mollifier;
use stefan_core::StefanError;

fn map_for(grid: &PolarGrid, geom: &ReferenceGeometry, h: &HeightState) -> stefan_core::Result<AleMapData> {
    let disp = solve_harmonic_extension(geom, grid, h, None)?;
    compute_map_data(grid, &disp, [grid.zeros(), grid.zeros()], 0.0)
}

#[test]
fn zero_height_gives_the_identity() {
    let geom = ReferenceGeometry::circle(1.0, 2.0, 32).unwrap();
    for grid in [PolarGrid::disc(1.0, 16, 32), PolarGrid::annulus(1.0, 2.0, 16, 32)] {
        let m = map_for(&grid, &geom, &HeightState::zero(8)).unwrap();
        assert!(m.jac.iter().all(|&j| j == 1.0));
        assert!(m.disp[0].iter().chain(m.disp[1].iter()).all(|&d| d == 0.0));
        assert!(validate_map(&grid, &m, 1e-10).pass);
    }
}

#[test]
fn disc_mode_one_matches_the_closed_form_jacobian() {
    // h = ε cos θ on the unit disc: Ψ − x = ε/2 (1 + x² − y², 2xy), so J = (1 + εx)² + ε²y²
    let eps = 0.05;
    let n = 64;
    let geom = ReferenceGeometry::circle(1.0, 2.0, n).unwrap();
    let grid = PolarGrid::disc(1.0, 24, n);
    let h = HeightState::from_modes(&[FourierMode::cos(1, eps)], 8);
    let m = map_for(&grid, &geom, &h).unwrap();
    let mut err = 0.0f64;
    for i in 0..grid.n_r() {
        for j in 0..n {
            let (x, y) = (grid.r[i] * grid.theta(j).cos(), grid.r[i] * grid.theta(j).sin());
            let exact = (1.0 + eps * x).powi(2) + (eps * y).powi(2);
            err = err.max((m.jac[[i, j]] - exact).abs());
        }
    }
    assert!(err < 1e-10, "{err}");
    let (lo, hi) = m.j_extrema();
    assert!((lo - 0.95f64.powi(2)).abs() < 1e-3 && (hi - 1.05f64.powi(2)).abs() < 1e-3);
}

#[test]
fn folding_height_is_reported_with_a_node() {
    let n = 64;
    let geom = ReferenceGeometry::circle(1.0, 2.0, n).unwrap();
    let grid = PolarGrid::disc(1.0, 24, n);
    let h = HeightState::from_modes(&[FourierMode::cos(8, 0.4)], 16);
    match map_for(&grid, &geom, &h) {
        Err(StefanError::MapDegeneracy { i, j, jac, .. }) => {
            assert!(jac <= 0.0);
            assert!(i < grid.n_r() && j < n);
        }
        other => panic!("expected a degeneracy, got {:?}", other.map(|m| m.j_extrema())),
    }
}

#[test]
fn velocity_vanishes_for_a_still_interface() {
    let geom = ReferenceGeometry::circle(1.0, 2.0, 32).unwrap();
    let grid = PolarGrid::annulus(1.0, 2.0, 16, 32);
    let h = HeightState::from_modes(&[FourierMode::cos(2, 0.02)], 8);
    let w = analytic_velocity(&geom, &grid, &h, None).unwrap();
    assert!(w[0].iter().chain(w[1].iter()).all(|&v| v == 0.0));
}

#[test]
fn mollified_map_is_closer_to_the_identity() {
    let geom = ReferenceGeometry::circle(1.0, 2.0, 64).unwrap();
    let grid = PolarGrid::disc(1.0, 24, 64);
    let h = HeightState::from_modes(&[FourierMode::cos(6, 0.03)], 16);
    let raw = solve_harmonic_extension(&geom, &grid, &h, None).unwrap();
    let moll = Mollifier::new(0.3).unwrap().with_table(32);
    let smooth = solve_harmonic_extension(&geom, &grid, &h, Some(&moll)).unwrap();
    let size = |f: &[stefan_core::harmonic::HarmonicField; 2]| f[0].value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(size(&smooth) < size(&raw));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inverse_jacobian_inverts_the_gradient(
        a1 in -0.04f64..0.04,
        a2 in -0.03f64..0.03,
        b3 in -0.02f64..0.02,
    ) {
        let geom = ReferenceGeometry::circle(1.0, 2.0, 32).unwrap();
        let h = HeightState::from_modes(
            &[FourierMode::cos(1, a1), FourierMode::cos(2, a2), FourierMode { k: 3, amp_cos: 0.0, amp_sin: b3 }],
            8,
        );
        for grid in [PolarGrid::disc(1.0, 12, 32), PolarGrid::annulus(1.0, 2.0, 12, 32)] {
            let m = map_for(&grid, &geom, &h).unwrap();
            let v = validate_map(&grid, &m, 1e-6);
            prop_assert!(v.max_a_grad_minus_id < 1e-12);
            prop_assert!(v.j_min >= 0.5 && v.j_max <= 1.5);
        }
    }
}
