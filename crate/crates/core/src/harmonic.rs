//! Harmonic extension of boundary data into the disc or annulus by exact
//! modal interpolation: `(r/R)^{|k|}` on the disc, and on the annulus a
//! combination of `(r/R_out)^{|k|}` and `(R/r)^{|k|}` (`a + b ln r` for `k = 0`).

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Result, StefanError};
use crate::grid::{Phase, PolarGrid};

/// A harmonic field with its exact radial and angular derivatives on a grid.
#[derive(Clone, Debug)]
pub struct HarmonicField {
    pub value: Array2<f64>,
    pub d_r: Array2<f64>,
    pub d_theta: Array2<f64>,
}

impl HarmonicField {
    pub fn cartesian_gradient(&self, grid: &PolarGrid) -> [Array2<f64>; 2] {
        grid.cartesian_from_polar(&self.d_r, &self.d_theta)
    }
}

const MIN_DET: f64 = 1e-12;

/// Radial factor and its derivative for mode `k` at radius `r`, scaled so the
/// factor equals one on Γ (and zero on the outer wall for the annulus
/// basis returned as `(inner_basis, outer_basis)`).
fn annulus_basis(k: usize, r: f64, r_in: f64, r_out: f64) -> ([f64; 2], [f64; 2]) {
    if k == 0 {
        let l = (r_out / r_in).ln();
        let s = (r / r_in).ln() / l;
        // inner: 1 - s, outer: s
        ([1.0 - s, -1.0 / (r * l)], [s, 1.0 / (r * l)])
    } else {
        let kf = k as f64;
        let rho = (r_in / r_out).powi(k as i32);
        let det = 1.0 - rho * rho;
        let p = (r / r_out).powi(k as i32);
        let m = (r_in / r).powi(k as i32);
        // f = A p + B m with inner data (1, 0) or outer data (0, 1).
        let (a_in, b_in) = (-rho / det, 1.0 / det);
        let (a_out, b_out) = (1.0 / det, -rho / det);
        let dp = kf / r * p;
        let dm = -kf / r * m;
        ([a_in * p + b_in * m, a_in * dp + b_in * dm], [a_out * p + b_out * m, a_out * dp + b_out * dm])
    }
}

/// Harmonic extension with Dirichlet data `inner` on Γ and, for the annulus,
/// `outer` on the outer wall.
pub fn harmonic_extension(grid: &PolarGrid, inner: &[f64], outer: Option<&[f64]>) -> Result<HarmonicField> {
    let (nr, nt) = grid.shape();
    if inner.len() != nt {
        return Err(StefanError::Shape(format!("boundary data has {} samples, grid has {nt}", inner.len())));
    }
    let ang = &grid.ang;
    let ci = ang.coefficients(inner);
    let co = match (grid.phase, outer) {
        (Phase::Plus, Some(o)) => {
            if o.len() != nt {
                return Err(StefanError::Shape("outer boundary data has wrong length".into()));
            }
            ang.coefficients(o)
        }
        (Phase::Plus, None) => vec![Complex64::new(0.0, 0.0); nt],
        (Phase::Minus, _) => Vec::new(),
    };
    if grid.phase == Phase::Plus {
        let max_k = nt / 2;
        for k in 1..=max_k {
            let rho = (grid.r_gamma / grid.r_outer).powi(k as i32);
            if 1.0 - rho * rho < MIN_DET {
                return Err(StefanError::Conditioning { mode: k, det: 1.0 - rho * rho });
            }
        }
    }
    let mut val = Array2::<Complex64>::zeros((nr, nt));
    let mut dr = Array2::<Complex64>::zeros((nr, nt));
    let mut dt = Array2::<Complex64>::zeros((nr, nt));
    for i in 0..nr {
        let r = grid.r[i];
        for idx in 0..nt {
            let k = ang.wavenumber(idx);
            let ka = k.unsigned_abs() as usize;
            let (f, fp) = match grid.phase {
                Phase::Minus => {
                    if ka == 0 {
                        (ci[idx], Complex64::new(0.0, 0.0))
                    } else {
                        let p = (r / grid.r_gamma).powi(ka as i32);
                        (ci[idx] * p, ci[idx] * (ka as f64 / r * p))
                    }
                }
                Phase::Plus => {
                    let (bi, bo) = annulus_basis(ka, r, grid.r_gamma, grid.r_outer);
                    (ci[idx] * bi[0] + co[idx] * bo[0], ci[idx] * bi[1] + co[idx] * bo[1])
                }
            };
            val[[i, idx]] = f;
            dr[[i, idx]] = fp;
            dt[[i, idx]] = if ang.is_nyquist(idx) { Complex64::new(0.0, 0.0) } else { f * Complex64::new(0.0, k as f64) };
        }
    }
    Ok(HarmonicField {
        value: ang.synthesize_rows(&val),
        d_r: ang.synthesize_rows(&dr),
        d_theta: ang.synthesize_rows(&dt),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_extends_to_constant() {
        let g = PolarGrid::disc(1.0, 10, 32);
        let f = harmonic_extension(&g, &[2.5; 32], None).unwrap();
        for v in f.value.iter() {
            assert!((v - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn annulus_k0_is_logarithmic() {
        let g = PolarGrid::annulus(1.0, 2.0, 10, 32);
        let f = harmonic_extension(&g, &[1.0; 32], Some(&[0.0; 32])).unwrap();
        for i in 0..10 {
            let expect = 1.0 - g.r[i].ln() / 2f64.ln();
            assert!((f.value[[i, 3]] - expect).abs() < 1e-13);
        }
    }
}
