//! Interface motion by the jump law `h_t = [v·ñ]⁺₋`.

use num_complex::Complex64;

use crate::error::{Result, StefanError};
use crate::fourier::Angular;
use crate::geometry::{check_height, moving_normal, HeightState, ReferenceGeometry};
use crate::grid::PolarGrid;
use crate::heat::PhaseField;

/// Values of `v` on the Γ row of a phase.
pub fn gamma_trace(grid: &PolarGrid, field: &PhaseField) -> Vec<[f64; 2]> {
    let i = grid.gamma_row();
    (0..grid.n_theta()).map(|j| [field.v[0][[i, j]], field.v[1][[i, j]]]).collect()
}

/// `h_t = v⁺·ñ − v⁻·ñ` with `ñ` built from the geometric height samples.
pub fn interface_velocity(
    v_plus: &[[f64; 2]],
    v_minus: &[[f64; 2]],
    geom: &ReferenceGeometry,
    h_geom: &[f64],
) -> Result<Vec<f64>> {
    if v_plus.len() != v_minus.len() || v_plus.len() != geom.n_theta() {
        return Err(StefanError::Shape("interface traces do not match the Γ sampling".into()));
    }
    let mn = moving_normal(geom, h_geom)?;
    Ok(v_plus
        .iter()
        .zip(v_minus)
        .zip(&mn.n_tilde)
        .map(|((p, m), nt)| (p[0] - m[0]) * nt[0] + (p[1] - m[1]) * nt[1])
        .collect())
}

/// Forward-Euler update of the height coefficients; records `h_t` and its
/// backward differences.
pub fn step_interface(h: &HeightState, ht: &[f64], dt: f64, ang: &Angular) -> Result<HeightState> {
    if !(dt > 0.0) {
        return Err(StefanError::DegenerateInterface(format!("time step must be positive, got {dt}")));
    }
    let vel = HeightState::truncate_samples(ang, ht, h.k_max());
    Ok(advance_coefficients(h, vel, dt))
}

pub(crate) fn advance_coefficients(h: &HeightState, vel: Vec<Complex64>, dt: f64) -> HeightState {
    let coeffs: Vec<Complex64> = h.coeffs.iter().zip(&vel).map(|(c, v)| c + v * dt).collect();
    let d2: Vec<Complex64> = vel.iter().zip(&h.d1).map(|(a, b)| (a - b) / dt).collect();
    let d3 = h.d2.as_ref().map(|old| d2.iter().zip(old).map(|(a, b)| (a - b) / dt).collect());
    HeightState { coeffs, d1: vel, d2: Some(d2), d3, t: h.t + dt }
}

/// Validates the updated height against the interface invariants.
pub fn validate_height(geom: &ReferenceGeometry, h_geom: &[f64]) -> Result<()> {
    check_height(geom, h_geom)
}
