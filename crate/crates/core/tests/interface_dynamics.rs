use stefan_core::config::{CflPolicy, Q0Preset, SimConfig};
use stefan_core::fourier::Angular;
use stefan_core::geometry::{FourierMode, HeightState, ReferenceGeometry};
use stefan_core::interface::{interface_velocity, step_interface};
use stefan_core::sim::Simulation;
use stefan_core::StefanError;

fn small() -> SimConfig {
    let mut c = SimConfig::default();
    c.geometry.n_theta = 32;
    c.grid.n_r_minus = 16;
    c.grid.n_r_plus = 16;
    c.grid.k_max = 8;
    c
}

fn affine(minus: f64, plus: f64) -> SimConfig {
    let mut c = small();
    c.init.q0_preset = Q0Preset::RadialAffine;
    c.init.q0_scale_minus = Some(minus);
    c.init.q0_scale_plus = Some(plus);
    c
}

#[test]
fn front_speed_is_the_jump_of_radial_slopes() {
    // q⁻ = −a|r−1|, q⁺ = b|r−1|: h_t = ∂_r q⁻ − ∂_r q⁺ = a − b
    for (a, b) in [(0.5, 1.0), (1.0, 0.25)] {
        let sim = Simulation::new(affine(a, b)).unwrap();
        for s in &sim.admissibility.initial_front_speed {
            assert!((s - (a - b)).abs() < 1e-9, "{s}");
        }
    }
}

#[test]
fn melting_front_moves_inward() {
    let mut sim = Simulation::new(affine(0.5, 1.0)).unwrap();
    for _ in 0..20 {
        sim.step().unwrap();
    }
    let r = sim.geom.r_gamma + sim.state.h.coeffs[0].re;
    // speed starts at 0.5 and stays below the larger slope
    assert!(r < 1.0 - 0.5 * 0.02 && r > 1.0 - 0.02, "{r}");
    // radial data keep the front circular
    assert!(sim.state.h.coeffs[1..].iter().all(|c| c.norm() < 1e-12));
}

#[test]
fn zero_temperature_leaves_the_interface_in_place() {
    let mut c = small();
    c.init.h0 = vec![FourierMode::cos(2, 0.05)];
    let mut sim = Simulation::new(c).unwrap();
    let h0 = sim.state.h.coeffs.clone();
    for _ in 0..50 {
        sim.step().unwrap();
    }
    assert_eq!(sim.state.h.coeffs, h0);
    assert!((sim.state.t - 0.05).abs() < 1e-12);
}

#[test]
fn frozen_interface_does_not_move() {
    let mut c = affine(0.5, 1.0);
    c.time.freeze_interface = true;
    let mut sim = Simulation::new(c).unwrap();
    for _ in 0..5 {
        sim.step().unwrap();
    }
    assert!(sim.state.h.coeffs.iter().all(|c| c.norm() == 0.0));
    assert!(sim.state.h.d1.iter().all(|c| c.norm() == 0.0));
}

#[test]
fn cfl_abort_policy_stops_the_run() {
    let mut c = affine(0.5, 1.0);
    c.time.on_cfl = CflPolicy::Abort;
    c.time.cfl_advective = 1e-6;
    let mut sim = Simulation::new(c).unwrap();
    assert!(matches!(sim.step(), Err(StefanError::Cfl { .. })));
    assert_eq!(sim.state.step_index, 0);
}

#[test]
fn forward_euler_update_of_the_height() {
    let ang = Angular::new(32);
    let h = HeightState::from_modes(&[FourierMode::cos(1, 0.1)], 8);
    let ht: Vec<f64> = (0..32).map(|j| 0.2 + (3.0 * ang.theta(j)).sin()).collect();
    let next = step_interface(&h, &ht, 0.01, &ang).unwrap();
    let s0 = h.samples(&ang);
    let s1 = next.samples(&ang);
    for j in 0..32 {
        assert!((s1[j] - s0[j] - 0.01 * ht[j]).abs() < 1e-14);
    }
    assert!((next.t - 0.01).abs() < 1e-15);
    assert!(step_interface(&h, &ht, 0.0, &ang).is_err());
}

#[test]
fn interface_velocity_uses_the_normal_jump() {
    let geom = ReferenceGeometry::circle(1.0, 2.0, 32).unwrap();
    let n = geom.normal.clone();
    let plus: Vec<[f64; 2]> = n.iter().map(|v| [2.0 * v[0], 2.0 * v[1]]).collect();
    let minus: Vec<[f64; 2]> = n.iter().map(|v| [0.5 * v[0] - v[1], 0.5 * v[1] + v[0]]).collect();
    let ht = interface_velocity(&plus, &minus, &geom, &[0.0; 32]).unwrap();
    assert!(ht.iter().all(|v| (v - 1.5).abs() < 1e-14));
    assert!(interface_velocity(&plus[..8], &minus, &geom, &[0.0; 32]).is_err());
}
