//! Periodic mollification by a compactly supported smooth bump, applied as a
//! Fourier multiplier whose symbol is obtained by quadrature.

use std::f64::consts::PI;

use crate::error::{Result, StefanError};
use crate::fourier::Angular;
use crate::stencil::gauss_legendre;

/// Unnormalized bump `exp(-1/(1-x²))` on `|x| < 1`.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

const GL_POINTS: usize = 10;

fn composite_gl(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(GL_POINTS);
    let h = 2.0 / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = -1.0 + p as f64 * h;
        let mid = a + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc += wi * f(mid + 0.5 * h * xi);
        }
    }
    acc * 0.5 * h
}

/// `∫_{-1}^{1} exp(-1/(1-x²)) dx`.
pub fn bump_mass() -> f64 {
    composite_gl(bump, 64)
}

#[derive(Clone, Debug)]
pub struct Mollifier {
    sigma: f64,
    norm: f64,
    table: Vec<f64>,
}

impl Mollifier {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(StefanError::InvalidGeometry(format!("mollifier radius must be positive, got {sigma}")));
        }
        if sigma >= PI {
            return Err(StefanError::InvalidGeometry(format!(
                "mollifier radius {sigma} must stay below half a period (pi)"
            )));
        }
        Ok(Mollifier { sigma, norm: 1.0 / bump_mass(), table: Vec::new() })
    }

    /// Builds the symbol table for wavenumbers `0..=k_max`.
    pub fn with_table(mut self, k_max: usize) -> Self {
        self.table = (0..=k_max).map(|k| self.compute_symbol(k)).collect();
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn compute_symbol(&self, k: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let omega = k as f64 * self.sigma;
        let panels = 64 + 4 * omega.ceil() as usize;
        self.norm * composite_gl(|x| bump(x) * (omega * x).cos(), panels)
    }

    /// Symbol `m_σ(k)` of the mollifier.
    pub fn symbol(&self, k: usize) -> f64 {
        self.table.get(k).copied().unwrap_or_else(|| self.compute_symbol(k))
    }

    pub fn mollify(&self, ang: &Angular, f: &[f64]) -> Vec<f64> {
        ang.apply(f, &ang.symmetric_multiplier(|k| self.symbol(k)))
    }

    /// The doubly mollified samples `Λ_σ Λ_σ f`.
    pub fn mollify_twice(&self, ang: &Angular, f: &[f64]) -> Vec<f64> {
        ang.apply(f, &ang.symmetric_multiplier(|k| self.symbol(k).powi(2)))
    }
}
