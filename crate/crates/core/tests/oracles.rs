use std::f64::consts::PI;

use proptest::prelude::*;

use stefan_core::oracles::{
    annulus_eigen_oracle, annulus_harmonic_oracle, bessel_j0, bessel_j0_first_zero, eigen_decay, eigen_oracle_disc,
    radial_two_phase_oracle, ShootingEnd,
};

#[test]
fn bessel_reference_values() {
    // tabulated J₀
    for (x, v) in [(0.0, 1.0), (1.0, 0.7651976865579666), (5.0, -0.1775967713143383), (20.0, 0.1670246643405831)] {
        assert!((bessel_j0(x) - v).abs() < 1e-12, "J0({x})");
    }
    assert!((bessel_j0(-1.0) - bessel_j0(1.0)).abs() == 0.0);
    assert!((bessel_j0_first_zero() - 2.404825557695773).abs() < 1e-13);
}

#[test]
fn disc_eigenvalue_scales_with_radius() {
    let l1 = eigen_oracle_disc(1.0);
    assert!((l1 - 5.783185962946784).abs() < 1e-12);
    assert!((eigen_oracle_disc(2.0) - l1 / 4.0).abs() < 1e-12);
    assert!((eigen_decay(l1, 0.5) - (-0.5 * l1).exp()).abs() == 0.0);
}

#[test]
fn annulus_eigenvalues_converge_under_refinement() {
    for end in [ShootingEnd::Value, ShootingEnd::Slope] {
        let a = annulus_eigen_oracle(1.0, 2.0, end, 2000).unwrap();
        let b = annulus_eigen_oracle(1.0, 2.0, end, 4000).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }
    let dir = annulus_eigen_oracle(1.0, 2.0, ShootingEnd::Value, 4000).unwrap();
    let mixed = annulus_eigen_oracle(1.0, 2.0, ShootingEnd::Slope, 4000).unwrap();
    assert!((dir - 9.7533).abs() < 1e-3, "{dir}");
    assert!((mixed - 1.8517).abs() < 1e-3, "{mixed}");
    // thin annulus: close to the slab value (π/w)²
    let thin = annulus_eigen_oracle(10.0, 10.1, ShootingEnd::Value, 4000).unwrap();
    assert!((thin / (PI / 0.1).powi(2) - 1.0).abs() < 1e-3);
    assert!(annulus_eigen_oracle(2.0, 1.0, ShootingEnd::Value, 100).is_err());
}

#[test]
fn radial_oracle_keeps_a_cold_free_front_still() {
    let zero = |_r: f64| 0.0;
    let res = radial_two_phase_oracle(1.0, 2.0, &zero, &zero, 0.5, 32, 5).unwrap();
    assert!(res.front.iter().all(|&s| (s - 1.0).abs() < 1e-14));
    assert_eq!(res.times.len(), res.front.len());
}

#[test]
fn radial_oracle_conserves_enthalpy() {
    // ∫q dx − π S² is invariant for zero flux at the outer wall
    let qm = |r: f64| -0.5 * (1.0 - r);
    let qp = |r: f64| r - 1.0;
    let res = radial_two_phase_oracle(1.0, 2.0, &qm, &qp, 0.5, 256, 10).unwrap();
    let trap = |(r, q): &(Vec<f64>, Vec<f64>)| {
        (1..r.len()).map(|i| PI * (r[i] - r[i - 1]) * (q[i] * r[i] + q[i - 1] * r[i - 1])).sum::<f64>()
    };
    let s = *res.front.last().unwrap();
    let invariant = trap(&res.profile_minus) + trap(&res.profile_plus) - PI * s * s;
    assert!((invariant - PI / 2.0).abs() < 1e-3, "{invariant}");
    // heat flows into the colder inner phase, so the front retreats
    assert!(res.front.windows(2).all(|w| w[1] < w[0]));
    assert!(res.refinement_error < 1e-4);
    assert_eq!(res.resolution, 512);
}

#[test]
fn radial_oracle_rejects_bad_input() {
    let zero = |_r: f64| 0.0;
    assert!(radial_two_phase_oracle(2.0, 1.0, &zero, &zero, 0.1, 32, 2).is_err());
    assert!(radial_two_phase_oracle(1.0, 2.0, &zero, &zero, 0.1, 4, 2).is_err());
    assert!(radial_two_phase_oracle(1.0, 2.0, &zero, &zero, -1.0, 32, 2).is_err());
}

proptest! {
    #[test]
    fn annulus_harmonic_hits_its_boundary_values(
        k in 0u32..12,
        inner in -2.0f64..2.0,
        outer in -2.0f64..2.0,
        r_in in 0.2f64..1.5,
        width in 0.2f64..2.0,
    ) {
        let r_out = r_in + width;
        let m = annulus_harmonic_oracle(k, inner, outer, r_in, r_out).unwrap();
        let scale = inner.abs().max(outer.abs()).max(1.0);
        prop_assert!((m.eval(r_in) - inner).abs() < 1e-10 * scale);
        prop_assert!((m.eval(r_out) - outer).abs() < 1e-10 * scale);
        // radial Laplacian of the mode vanishes
        let r = r_in + 0.37 * width;
        let d = 1e-4;
        let second = (m.derivative(r + d) - m.derivative(r - d)) / (2.0 * d);
        let kf = k as f64;
        let lap = second + m.derivative(r) / r - kf * kf * m.eval(r) / (r * r);
        let size = m.a.abs() * r.powi(k as i32) + m.b.abs() * r.powi(-(k as i32)) + m.b.abs();
        prop_assert!(lap.abs() < 1e-5 * size.max(1.0) * (1.0 + kf * kf) / (r * r));
    }
}
