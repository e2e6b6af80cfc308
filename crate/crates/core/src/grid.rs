//! Polar grids on the reference disc and annulus, radial stencils and quadrature.
//!
//! Both grids store fields as `(n_r, n_theta)` arrays, rows being radii.
//! The disc grid is offset by half a cell at the origin (`r_i = (i + 1/2) Δr`,
//! last row exactly on Γ); radial stencils that reach past the pole read the
//! antipodal column, which is the parity coupling of angular modes.

use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::fourier::Angular;
use crate::stencil::{interpolatory_weights, offset_weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Minus,
    Plus,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Minus => write!(f, "minus"),
            Phase::Plus => write!(f, "plus"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RowStencil {
    pub offsets: Vec<i64>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PolarGrid {
    pub phase: Phase,
    pub r: Vec<f64>,
    pub dr: f64,
    pub r_gamma: f64,
    pub r_outer: f64,
    pub ang: Angular,
    first: Vec<RowStencil>,
    second: Vec<RowStencil>,
    /// Radial quadrature weights for `∫ f r dr`, already multiplied by `r_i`.
    radial_weights: Vec<f64>,
}

const MIN_RADIAL_NODES: usize = 8;

impl PolarGrid {
    pub fn disc(r_gamma: f64, n_r: usize, n_theta: usize) -> Self {
        assert!(n_r >= MIN_RADIAL_NODES);
        let dr = r_gamma / (n_r as f64 - 0.5);
        let mut r: Vec<f64> = (0..n_r).map(|i| (i as f64 + 0.5) * dr).collect();
        r[n_r - 1] = r_gamma;
        let n = n_r as i64;
        let first = (0..n)
            .map(|i| {
                let offs: Vec<i64> = if i <= n - 3 {
                    (-2..=2).collect()
                } else if i == n - 2 {
                    (-3..=1).collect()
                } else {
                    (-3..=0).collect()
                };
                RowStencil { weights: offset_weights(&offs, dr, 1), offsets: offs }
            })
            .collect();
        let second = (0..n)
            .map(|i| {
                let offs: Vec<i64> = if i <= n - 3 {
                    (-2..=2).collect()
                } else if i == n - 2 {
                    (-4..=1).collect()
                } else {
                    (-5..=0).collect()
                };
                RowStencil { weights: offset_weights(&offs, dr, 2), offsets: offs }
            })
            .collect();
        let nodes: Vec<f64> = std::iter::once(0.0).chain(r.iter().copied()).collect();
        let w = interpolatory_weights(&nodes, 4);
        let radial_weights = (0..n_r).map(|i| w[i + 1] * r[i]).collect();
        PolarGrid {
            phase: Phase::Minus,
            r,
            dr,
            r_gamma,
            r_outer: r_gamma,
            ang: Angular::new(n_theta),
            first,
            second,
            radial_weights,
        }
    }

    pub fn annulus(r_gamma: f64, r_outer: f64, n_r: usize, n_theta: usize) -> Self {
        assert!(n_r >= MIN_RADIAL_NODES);
        let dr = (r_outer - r_gamma) / (n_r as f64 - 1.0);
        let mut r: Vec<f64> = (0..n_r).map(|i| r_gamma + i as f64 * dr).collect();
        r[n_r - 1] = r_outer;
        let n = n_r as i64;
        let first = (0..n)
            .map(|i| {
                let offs: Vec<i64> = if i == 0 {
                    (0..=3).collect()
                } else if i == 1 {
                    (-1..=3).collect()
                } else if i <= n - 3 {
                    (-2..=2).collect()
                } else if i == n - 2 {
                    (-3..=1).collect()
                } else {
                    (-3..=0).collect()
                };
                RowStencil { weights: offset_weights(&offs, dr, 1), offsets: offs }
            })
            .collect();
        let second = (0..n)
            .map(|i| {
                let offs: Vec<i64> = if i == 0 {
                    (0..=5).collect()
                } else if i == 1 {
                    (-1..=4).collect()
                } else if i <= n - 3 {
                    (-2..=2).collect()
                } else if i == n - 2 {
                    (-4..=1).collect()
                } else {
                    (-5..=0).collect()
                };
                RowStencil { weights: offset_weights(&offs, dr, 2), offsets: offs }
            })
            .collect();
        let w = interpolatory_weights(&r, 4);
        let radial_weights = (0..n_r).map(|i| w[i] * r[i]).collect();
        PolarGrid {
            phase: Phase::Plus,
            r,
            dr,
            r_gamma,
            r_outer,
            ang: Angular::new(n_theta),
            first,
            second,
            radial_weights,
        }
    }

    pub fn n_r(&self) -> usize {
        self.r.len()
    }

    pub fn n_theta(&self) -> usize {
        self.ang.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_r(), self.n_theta())
    }

    pub fn zeros(&self) -> Array2<f64> {
        Array2::zeros(self.shape())
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.ang.theta(j)
    }

    /// Row index of the interface Γ.
    pub fn gamma_row(&self) -> usize {
        match self.phase {
            Phase::Minus => self.n_r() - 1,
            Phase::Plus => 0,
        }
    }

    /// Row index of the outer boundary (plus phase only).
    pub fn outer_row(&self) -> Option<usize> {
        match self.phase {
            Phase::Minus => None,
            Phase::Plus => Some(self.n_r() - 1),
        }
    }

    pub fn first_stencil(&self, i: usize) -> &RowStencil {
        &self.first[i]
    }

    pub fn second_stencil(&self, i: usize) -> &RowStencil {
        &self.second[i]
    }

    /// Maps a possibly negative stencil row to a stored row and whether the
    /// column must be read at the antipode.
    pub fn resolve_row(&self, i: i64) -> (usize, bool) {
        if i >= 0 {
            (i as usize, false)
        } else {
            debug_assert_eq!(self.phase, Phase::Minus);
            ((-1 - i) as usize, true)
        }
    }

    fn apply_stencils(&self, field: &Array2<f64>, stencils: &[RowStencil]) -> Array2<f64> {
        let (nr, nt) = field.dim();
        assert_eq!(nr, self.n_r(), "field radial size does not match grid");
        let half = nt / 2;
        let mut out = Array2::<f64>::zeros((nr, nt));
        let src = field.as_slice().expect("standard layout");
        let dst = out.as_slice_mut().expect("standard layout");
        for (i, st) in stencils.iter().enumerate() {
            let row_out = &mut dst[i * nt..(i + 1) * nt];
            for (&o, &w) in st.offsets.iter().zip(&st.weights) {
                let (row, flip) = self.resolve_row(i as i64 + o);
                let row_in = &src[row * nt..(row + 1) * nt];
                if flip {
                    for j in 0..nt {
                        row_out[j] += w * row_in[(j + half) % nt];
                    }
                } else {
                    for (a, b) in row_out.iter_mut().zip(row_in) {
                        *a += w * b;
                    }
                }
            }
        }
        out
    }

    pub fn d_r(&self, field: &Array2<f64>) -> Array2<f64> {
        self.apply_stencils(field, &self.first)
    }

    pub fn d_rr(&self, field: &Array2<f64>) -> Array2<f64> {
        self.apply_stencils(field, &self.second)
    }

    pub fn d_theta(&self, field: &Array2<f64>) -> Array2<f64> {
        self.ang.derivative_rows(field, 1)
    }

    /// Polar derivatives `(∂_r f, ∂_θ f)`.
    pub fn polar_gradient(&self, field: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        (self.d_r(field), self.d_theta(field))
    }

    /// Cartesian gradient `(∂_1 f, ∂_2 f)` of a scalar field.
    pub fn gradient(&self, field: &Array2<f64>) -> [Array2<f64>; 2] {
        let (fr, ft) = self.polar_gradient(field);
        self.cartesian_from_polar(&fr, &ft)
    }

    pub fn cartesian_from_polar(&self, fr: &Array2<f64>, ft: &Array2<f64>) -> [Array2<f64>; 2] {
        let (nr, nt) = fr.dim();
        let mut g1 = Array2::<f64>::zeros((nr, nt));
        let mut g2 = Array2::<f64>::zeros((nr, nt));
        let (cs, sn) = self.trig();
        for i in 0..nr {
            let inv_r = 1.0 / self.r[i];
            for j in 0..nt {
                let a = fr[[i, j]];
                let b = ft[[i, j]] * inv_r;
                g1[[i, j]] = cs[j] * a - sn[j] * b;
                g2[[i, j]] = sn[j] * a + cs[j] * b;
            }
        }
        [g1, g2]
    }

    pub fn trig(&self) -> (Vec<f64>, Vec<f64>) {
        let nt = self.n_theta();
        let cs = (0..nt).map(|j| self.theta(j).cos()).collect();
        let sn = (0..nt).map(|j| self.theta(j).sin()).collect();
        (cs, sn)
    }

    /// Radial quadrature weights for `∫ g(r) r dr` over the phase interval.
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    /// `∫ f dx` over the reference domain of the phase.
    pub fn integrate(&self, field: &Array2<f64>) -> f64 {
        let dtheta = 2.0 * std::f64::consts::PI / self.n_theta() as f64;
        let mut acc = 0.0;
        for (i, w) in self.radial_weights.iter().enumerate() {
            acc += w * field.row(i).sum();
        }
        acc * dtheta
    }

    pub fn integrate_product(&self, a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let dtheta = 2.0 * std::f64::consts::PI / self.n_theta() as f64;
        let mut acc = 0.0;
        for (i, w) in self.radial_weights.iter().enumerate() {
            let s: f64 = a.row(i).iter().zip(b.row(i)).map(|(x, y)| x * y).sum();
            acc += w * s;
        }
        acc * dtheta
    }

    pub fn l2_norm(&self, field: &Array2<f64>) -> f64 {
        self.integrate_product(field, field).max(0.0).sqrt()
    }

    /// Distance of each radius to the nearest boundary of the reference domain.
    pub fn boundary_distance(&self, i: usize) -> f64 {
        match self.phase {
            Phase::Minus => self.r_gamma - self.r[i],
            Phase::Plus => (self.r[i] - self.r_gamma).min(self.r_outer - self.r[i]),
        }
    }

    /// Minimal local mesh width at row `i`.
    pub fn local_spacing(&self, i: usize) -> f64 {
        let dth = 2.0 * std::f64::consts::PI / self.n_theta() as f64;
        self.dr.min(self.r[i] * dth)
    }

    pub fn same_shape(&self, field: &Array2<f64>) -> bool {
        field.dim() == self.shape()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_area_and_annulus_area() {
        let d = PolarGrid::disc(1.0, 16, 16);
        let one = d.zeros() + 1.0;
        assert!((d.integrate(&one) - std::f64::consts::PI).abs() < 1e-12);
        let a = PolarGrid::annulus(1.0, 2.0, 16, 16);
        let one = a.zeros() + 1.0;
        assert!((a.integrate(&one) - 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn gradient_of_linear_field_is_exact_through_the_pole() {
        let g = PolarGrid::disc(1.0, 12, 16);
        let f = Array2::from_shape_fn(g.shape(), |(i, j)| g.r[i] * g.theta(j).cos());
        let [g1, g2] = g.gradient(&f);
        for v in g1.iter() {
            assert!((v - 1.0).abs() < 1e-11);
        }
        for v in g2.iter() {
            assert!(v.abs() < 1e-11);
        }
    }
}
