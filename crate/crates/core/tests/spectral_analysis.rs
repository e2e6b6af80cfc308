use ndarray::Array2;

use stefan_core::config::{Q0Preset, SimConfig};
use stefan_core::grid::{Phase, PolarGrid};
use stefan_core::oracles::{annulus_eigen_oracle, eigen_oracle_disc, ShootingEnd};
use stefan_core::sim::Simulation;
use stefan_core::spectral::{data_constants, first_eigenpair, OuterCondition, SpectralConstants};
use stefan_core::StefanError;

#[test]
fn annulus_eigenvalues_match_shooting() {
    let g = PolarGrid::annulus(1.0, 2.0, 128, 32);
    let dir = first_eigenpair(&g, OuterCondition::Dirichlet).unwrap().value;
    let mixed = first_eigenpair(&g, OuterCondition::Neumann).unwrap().value;
    let dir_ref = annulus_eigen_oracle(1.0, 2.0, ShootingEnd::Value, 4000).unwrap();
    let mixed_ref = annulus_eigen_oracle(1.0, 2.0, ShootingEnd::Slope, 4000).unwrap();
    assert!((dir - dir_ref).abs() / dir_ref < 1e-6, "{dir} vs {dir_ref}");
    assert!((mixed - mixed_ref).abs() / mixed_ref < 1e-6, "{mixed} vs {mixed_ref}");
    assert!(mixed < dir);
}

#[test]
fn disc_eigenfunction_is_positive_and_radial() {
    let g = PolarGrid::disc(1.0, 32, 32);
    let p = first_eigenpair(&g, OuterCondition::Dirichlet).unwrap();
    assert!((p.value - eigen_oracle_disc(1.0)).abs() < 1e-5);
    for i in 0..g.gamma_row() {
        let row = p.function.row(i);
        assert!(row.iter().all(|&v| v > 0.0));
        assert!(row.iter().all(|&v| (v - row[0]).abs() < 1e-12 * row[0].abs()));
    }
}

#[test]
fn rate_constants_follow_their_definitions() {
    let c = SpectralConstants::from_eigenvalues(5.8, 9.7, 1.85, 0.1);
    assert_eq!(c.lambda1, 5.8);
    assert!((c.beta(Phase::Minus) - 11.5).abs() < 1e-14);
    assert!((c.beta(Phase::Plus) - 19.3).abs() < 1e-14);
    assert!((c.sigma(Phase::Minus) - 0.05).abs() < 1e-14);
    assert!((c.sigma(Phase::Plus) - 3.95).abs() < 1e-14);
    assert!((c.gamma_plus - 13.6).abs() < 1e-14);
    assert!(c.c1_minus.is_nan());
}

#[test]
fn eta_must_be_small_relative_to_the_eigenvalue() {
    assert!(SpectralConstants::from_eigenvalues(5.8, 9.7, 1.85, 0.1).check_eta().is_ok());
    for eta in [0.0, 5.8, 7.0] {
        let err = SpectralConstants::from_eigenvalues(5.8, 9.7, 1.85, eta).check_eta().unwrap_err();
        assert!(matches!(err, StefanError::Config(_)));
        assert!(err.to_string().contains("small constant"));
    }
}

#[test]
fn projection_of_the_eigenfunction_on_itself() {
    let g = PolarGrid::disc(1.0, 24, 32);
    let phi = first_eigenpair(&g, OuterCondition::Dirichlet).unwrap().function;
    // negative inner data rise towards Γ
    let d = data_constants(&g, &(&phi * -3.0), &phi).unwrap();
    assert!((d.c1 + 3.0 * g.integrate_product(&phi, &phi)).abs() < 1e-12);
    assert!(d.k_norm > 0.0 && d.k_rt > 0.0);
    // zero projection
    let odd = Array2::from_shape_fn(g.shape(), |(i, j)| phi[[i, j]] * g.theta(j).cos());
    assert!(matches!(data_constants(&g, &odd, &phi), Err(StefanError::DegenerateData(_))));
}

fn small(preset: Q0Preset) -> SimConfig {
    let mut c = SimConfig::default();
    c.geometry.n_theta = 32;
    c.grid.n_r_minus = 16;
    c.grid.n_r_plus = 16;
    c.grid.k_max = 8;
    c.init.q0_preset = preset;
    c
}

#[test]
fn eigen_data_are_admissible() {
    let mut c = small(Q0Preset::Eigen);
    c.init.q0_scale = 0.01;
    let sim = Simulation::new(c).unwrap();
    assert!(sim.admissibility.admissible);
    for p in &sim.admissibility.phases {
        assert!(p.sign_ok && p.rt_ok);
        assert!(p.min_normal_derivative > 0.0);
    }
    assert!(sim.constants.c1_minus < 0.0 && sim.constants.c1_plus > 0.0);
}

#[test]
fn wrong_sign_data_fail_the_rayleigh_taylor_check() {
    let mut c = small(Q0Preset::RadialAffine);
    c.init.q0_scale_minus = Some(-0.5);
    c.init.q0_scale_plus = Some(1.0);
    let sim = Simulation::new(c.clone()).unwrap();
    assert!(!sim.admissibility.admissible);
    assert!(!sim.warnings.is_empty());
    c.analysis.enforce_admissibility = true;
    assert!(Simulation::new(c).is_err());
}

#[test]
fn zero_data_fall_back_with_a_warning() {
    let sim = Simulation::new(small(Q0Preset::Zero)).unwrap();
    assert!(sim.warnings.iter().any(|w| w.contains("projection") || w.contains("degenerate")));
    assert!(sim.constants.beta_minus.is_finite());
}
