//! Per-angular-mode radial systems `α I + β Δ_k` with boundary rows, where
//! `Δ_k f = f'' + f'/r − k² f/r²` uses the grid's radial stencils.
//!
//! Boundary rows: Dirichlet on Γ for both phases; for the annulus the outer
//! row imposes a prescribed radial derivative with the one-sided stencil.

use nalgebra::{DMatrix, LU};
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Result, StefanError};
use crate::grid::{Phase, PolarGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RowKind {
    Interior,
    Dirichlet,
    Neumann,
}

/// Condition imposed on the outer row of the annulus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OuterRow {
    /// Prescribed radial derivative.
    #[default]
    Slope,
    /// Prescribed value.
    Value,
}

fn row_kind(grid: &PolarGrid, i: usize, outer: OuterRow) -> RowKind {
    if i == grid.gamma_row() {
        RowKind::Dirichlet
    } else if Some(i) == grid.outer_row() {
        match outer {
            OuterRow::Slope => RowKind::Neumann,
            OuterRow::Value => RowKind::Dirichlet,
        }
    } else {
        RowKind::Interior
    }
}

/// Dense matrix of `Δ_k` restricted to interior rows (boundary rows zero).
pub fn mode_laplacian(grid: &PolarGrid, k: usize) -> DMatrix<f64> {
    let n = grid.n_r();
    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
    let kk = (k * k) as f64;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        if row_kind(grid, i, OuterRow::Slope) != RowKind::Interior {
            continue;
        }
        let r = grid.r[i];
        let mut add = |off: i64, w: f64| {
            let (col, flip) = grid.resolve_row(i as i64 + off);
            m[(i, col)] += if flip { parity * w } else { w };
        };
        let s2 = grid.second_stencil(i);
        for (&o, &w) in s2.offsets.iter().zip(&s2.weights) {
            add(o, w);
        }
        let s1 = grid.first_stencil(i);
        for (&o, &w) in s1.offsets.iter().zip(&s1.weights) {
            add(o, w / r);
        }
        m[(i, i)] -= kk / (r * r);
    }
    m
}

pub struct ModalSystem {
    phase: Phase,
    n_r: usize,
    n_theta: usize,
    outer: OuterRow,
    lus: Vec<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl std::fmt::Debug for ModalSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModalSystem")
            .field("phase", &self.phase)
            .field("n_r", &self.n_r)
            .field("n_theta", &self.n_theta)
            .finish()
    }
}

impl ModalSystem {
    /// Factorizes `α I + β Δ_k` for every mode `0..=n_theta/2`.
    pub fn new(grid: &PolarGrid, alpha: f64, beta: f64) -> Result<Self> {
        Self::with_modes(grid, alpha, beta, grid.n_theta() / 2)
    }

    /// Same as [`ModalSystem::new`] but only for modes `0..=k_max`; higher
    /// modes are treated as zero by [`ModalSystem::solve`].
    pub fn with_modes(grid: &PolarGrid, alpha: f64, beta: f64, k_max: usize) -> Result<Self> {
        Self::build(grid, alpha, beta, k_max, OuterRow::Slope)
    }

    pub fn build(grid: &PolarGrid, alpha: f64, beta: f64, k_max: usize, outer: OuterRow) -> Result<Self> {
        let n = grid.n_r();
        let mut lus = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let mut m = mode_laplacian(grid, k) * beta;
            for i in 0..n {
                match row_kind(grid, i, outer) {
                    RowKind::Interior => m[(i, i)] += alpha,
                    RowKind::Dirichlet => m[(i, i)] = 1.0,
                    RowKind::Neumann => {
                        let st = grid.first_stencil(i);
                        for (&o, &w) in st.offsets.iter().zip(&st.weights) {
                            m[(i, (i as i64 + o) as usize)] += w;
                        }
                    }
                }
            }
            let lu = m.lu();
            if !lu.is_invertible() {
                return Err(StefanError::Conditioning { mode: k, det: 0.0 });
            }
            lus.push(lu);
        }
        Ok(ModalSystem { phase: grid.phase, n_r: n, n_theta: grid.n_theta(), outer, lus })
    }

    pub fn k_max(&self) -> usize {
        self.lus.len() - 1
    }

    /// Solves the system for a physical-space right-hand side. Boundary rows
    /// of `rhs` are ignored: Γ gets zero and the outer row gets `outer_slope`
    /// (zero when absent, and always zero for a prescribed outer value).
    pub fn solve(&self, grid: &PolarGrid, rhs: &Array2<f64>, outer_slope: Option<&[f64]>) -> Array2<f64> {
        assert_eq!(grid.phase, self.phase);
        assert_eq!(rhs.dim(), (self.n_r, self.n_theta));
        let ang = &grid.ang;
        let nt = self.n_theta;
        let coeffs = ang.row_coefficients(rhs);
        let gamma = grid.gamma_row();
        let outer = grid.outer_row();
        let slope_c = outer_slope.map(|g| ang.coefficients(g));
        let mut out = Array2::<Complex64>::zeros((self.n_r, nt));
        let mut b = DMatrix::<f64>::zeros(self.n_r, 2);
        for (k, lu) in self.lus.iter().enumerate() {
            if k > nt / 2 {
                break;
            }
            for i in 0..self.n_r {
                let c = coeffs[[i, k]];
                b[(i, 0)] = c.re;
                b[(i, 1)] = c.im;
            }
            b[(gamma, 0)] = 0.0;
            b[(gamma, 1)] = 0.0;
            if let Some(o) = outer {
                let s = if self.outer == OuterRow::Value { None } else { slope_c.as_ref().map(|c| c[k]) }.unwrap_or_default();
                b[(o, 0)] = s.re;
                b[(o, 1)] = s.im;
            }
            let x = lu.solve(&b).expect("factorization checked invertible");
            for i in 0..self.n_r {
                let z = Complex64::new(x[(i, 0)], x[(i, 1)]);
                out[[i, k]] = z;
                if k != 0 && k != nt / 2 {
                    out[[i, nt - k]] = z.conj();
                }
            }
        }
        ang.synthesize_rows(&out)
    }
}
