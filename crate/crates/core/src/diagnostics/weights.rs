//! Harmonic weight fields whose interface trace carries the Rayleigh-Taylor
//! information `e^{(−λ₁+η)t} / ∂_N q`.

use ndarray::Array2;

use crate::error::{Result, StefanError};
use crate::grid::{Phase, PolarGrid};
use crate::harmonic::harmonic_extension;
use crate::spectral::SpectralConstants;

#[derive(Clone, Debug)]
pub struct WeightField {
    pub minus: Array2<f64>,
    pub plus: Array2<f64>,
    pub t: f64,
}

impl WeightField {
    pub fn get(&self, phase: Phase) -> &Array2<f64> {
        match phase {
            Phase::Minus => &self.minus,
            Phase::Plus => &self.plus,
        }
    }

    /// `(min W⁻, max W⁻, min W⁺, max W⁺)`.
    pub fn extrema(&self) -> [f64; 4] {
        let ext = |a: &Array2<f64>| a.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let (a, b) = ext(&self.minus);
        let (c, d) = ext(&self.plus);
        [a, b, c, d]
    }
}

/// Interface data `e^{(−λ₁+η)t} / ∂_N q`; fails if the normal derivative is
/// not strictly positive somewhere.
pub fn interface_weight_data(phase: Phase, dn: &[f64], t: f64, c: &SpectralConstants) -> Result<Vec<f64>> {
    let min_dnq = dn.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_dnq > 0.0) {
        return Err(StefanError::WeightUndefined { phase, min_dnq });
    }
    let factor = ((-c.lambda1 + c.eta) * t).exp();
    Ok(dn.iter().map(|d| factor / d).collect())
}

/// Outer-wall value `e^{(−λ₁+λ₁⁺+η)t} / |c₁⁺|`.
pub fn outer_weight_value(t: f64, c: &SpectralConstants) -> Result<f64> {
    let c1 = c.c1_plus.abs();
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(StefanError::DegenerateData(
            "outer weight needs a nonzero projection of the plus-phase data".into(),
        ));
    }
    Ok(((-c.lambda1 + c.lambda1_plus + c.eta) * t).exp() / c1)
}

/// Solves for one phase's weight from its interface normal derivatives.
pub fn solve_phase_weight(grid: &PolarGrid, dn: &[f64], t: f64, c: &SpectralConstants) -> Result<Array2<f64>> {
    let inner = interface_weight_data(grid.phase, dn, t, c)?;
    let outer = match grid.phase {
        Phase::Minus => None,
        Phase::Plus => Some(vec![outer_weight_value(t, c)?; grid.n_theta()]),
    };
    Ok(harmonic_extension(grid, &inner, outer.as_deref())?.value)
}

/// Both weights; `dn[p]` are the Γ normal derivatives of phase `p` (minus first).
pub fn solve_weights(grids: [&PolarGrid; 2], dn: [&[f64]; 2], t: f64, c: &SpectralConstants) -> Result<WeightField> {
    Ok(WeightField {
        minus: solve_phase_weight(grids[0], dn[0], t, c)?,
        plus: solve_phase_weight(grids[1], dn[1], t, c)?,
        t,
    })
}
