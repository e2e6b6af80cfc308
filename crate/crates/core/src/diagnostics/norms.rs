//! Discrete Sobolev norms on Γ and on the reference domains.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Result, StefanError};
use crate::fourier::{sobolev_from_coefficients, Angular};
use crate::geometry::HeightState;
use crate::grid::PolarGrid;

/// Highest interior order computed with exact stencils.
pub const EXACT_INTERIOR_ORDER: usize = 2;

/// `|f|_s` of samples on Γ, with `|f|_s² = 2π Σ (1+k²)^s |f̂_k|²`.
pub fn boundary_sobolev_norm(ang: &Angular, f: &[f64], s: f64) -> f64 {
    sobolev_from_coefficients(ang, &ang.coefficients(f), s)
}

/// `|h|_s` of a truncated height series.
pub fn height_sobolev_norm(ang: &Angular, c: &[Complex64], s: f64) -> f64 {
    sobolev_from_coefficients(ang, &HeightState::full_spectrum(c, ang), s)
}

/// Cartesian derivatives of `q` of every multi-index with `|a| ≤ order`,
/// listed by increasing order as `(a₁, a₂, field)`.
pub fn cartesian_derivatives(grid: &PolarGrid, q: &Array2<f64>, order: usize) -> Vec<(usize, usize, Array2<f64>)> {
    let mut out = vec![(0, 0, q.clone())];
    let mut frontier = vec![(0usize, 0usize, q.clone())];
    for _ in 0..order {
        let mut next: Vec<(usize, usize, Array2<f64>)> = Vec::new();
        for (a1, a2, f) in &frontier {
            let [d1, d2] = grid.gradient(f);
            // differentiate in x₁ only from the pure-x₁ entry to list each multi-index once
            if *a2 == 0 {
                next.push((a1 + 1, 0, d1));
            }
            next.push((*a1, a2 + 1, d2));
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Squared angular completion `Σ_i w_i 2π Σ_k [(1+k̃²)^s − (1+k̃²)^{s₀}] |q̂_k(r_i)|²`
/// with `k̃ = k / R_Γ`.
fn angular_completion_sq(grid: &PolarGrid, q: &Array2<f64>, s: f64, s0: f64) -> f64 {
    if s <= s0 {
        return 0.0;
    }
    let coeffs = grid.ang.row_coefficients(q);
    let w = grid.radial_weights();
    let mut acc = 0.0;
    for (i, wi) in w.iter().enumerate() {
        let mut row = 0.0;
        for idx in 0..grid.n_theta() {
            let k = grid.ang.wavenumber(idx) as f64 / grid.r_gamma;
            let base = 1.0 + k * k;
            row += (base.powf(s) - base.powf(s0)) * coeffs[[i, idx]].norm_sqr();
        }
        acc += wi * row;
    }
    2.0 * std::f64::consts::PI * acc
}

/// Squared interior norm. Orders up to two are exact stencil quadratures;
/// larger or fractional orders need `surrogate` and add the angular completion.
pub fn interior_sobolev_sq(grid: &PolarGrid, q: &Array2<f64>, s: f64, surrogate: bool) -> Result<f64> {
    if !grid.same_shape(q) {
        return Err(StefanError::Shape("field does not match grid".into()));
    }
    let exact = s.floor().min(EXACT_INTERIOR_ORDER as f64);
    let is_exact = s == s.floor() && s <= EXACT_INTERIOR_ORDER as f64;
    if !is_exact && !surrogate {
        return Err(StefanError::UnsupportedOrder { requested: s, max: EXACT_INTERIOR_ORDER });
    }
    if s < 0.0 {
        return Err(StefanError::UnsupportedOrder { requested: s, max: EXACT_INTERIOR_ORDER });
    }
    let derivs = cartesian_derivatives(grid, q, exact as usize);
    let mut acc: f64 = derivs.iter().map(|(_, _, f)| grid.integrate_product(f, f)).sum();
    acc += angular_completion_sq(grid, q, s, exact);
    Ok(acc.max(0.0))
}

pub fn interior_sobolev_norm(grid: &PolarGrid, q: &Array2<f64>, s: f64, surrogate: bool) -> Result<f64> {
    interior_sobolev_sq(grid, q, s, surrogate).map(f64::sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_indices_are_listed_once() {
        let g = PolarGrid::disc(1.0, 10, 32);
        let d = cartesian_derivatives(&g, &g.zeros(), 2);
        let idx: Vec<(usize, usize)> = d.iter().map(|(a, b, _)| (*a, *b)).collect();
        assert_eq!(idx, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
    }
}
