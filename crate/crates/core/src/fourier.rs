//! Angular Fourier transforms on a uniform periodic grid.
//!
//! Coefficients follow the convention `f(θ_j) = Σ_k c_k e^{ikθ_j}`, so the
//! forward transform is normalized by `1/n`. Index `idx` of a coefficient
//! vector holds wavenumber `idx` for `idx <= n/2` and `idx - n` above.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct Angular {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Angular {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Angular").field("n", &self.n).finish()
    }
}

impl Angular {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2 && n % 2 == 0, "angular grid size must be even");
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Angular { n, fwd, inv }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed wavenumber stored at FFT index `idx` (Nyquist reported as `+n/2`).
    pub fn wavenumber(&self, idx: usize) -> i64 {
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx == self.n / 2
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n as f64
    }

    pub fn coefficients(&self, f: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(f.len(), self.n);
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        let s = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= s;
        }
        buf
    }

    pub fn complex_coefficients(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut buf = f.to_vec();
        self.fwd.process(&mut buf);
        let s = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= s;
        }
        buf
    }

    /// Real part of the synthesis `Σ c_k e^{ikθ_j}`.
    pub fn synthesize(&self, c: &[Complex64]) -> Vec<f64> {
        let mut buf = c.to_vec();
        self.inv.process(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub fn synthesize_complex(&self, c: &[Complex64]) -> Vec<Complex64> {
        let mut buf = c.to_vec();
        self.inv.process(&mut buf);
        buf
    }

    /// Multiplier of the `order`-th angular derivative, Nyquist handled so
    /// that real data stays real.
    pub fn derivative_multiplier(&self, order: u32) -> Vec<Complex64> {
        (0..self.n)
            .map(|idx| {
                if order == 0 {
                    return Complex64::new(1.0, 0.0);
                }
                let k = self.wavenumber(idx) as f64;
                if self.is_nyquist(idx) && order % 2 == 1 {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(0.0, k).powu(order)
            })
            .collect()
    }

    /// Multiplier `m(|k|)` from a symmetric real symbol.
    pub fn symmetric_multiplier(&self, symbol: impl Fn(usize) -> f64) -> Vec<Complex64> {
        (0..self.n)
            .map(|idx| Complex64::new(symbol(self.wavenumber(idx).unsigned_abs() as usize), 0.0))
            .collect()
    }

    pub fn apply(&self, f: &[f64], mult: &[Complex64]) -> Vec<f64> {
        let mut c = self.coefficients(f);
        for (ci, m) in c.iter_mut().zip(mult) {
            *ci *= m;
        }
        self.synthesize(&c)
    }

    pub fn derivative(&self, f: &[f64], order: u32) -> Vec<f64> {
        if order == 0 {
            return f.to_vec();
        }
        self.apply(f, &self.derivative_multiplier(order))
    }

    /// Applies a Hermitian multiplier to every row of `field`, packing two
    /// real rows into one complex transform.
    pub fn apply_rows(&self, field: &Array2<f64>, mult: &[Complex64]) -> Array2<f64> {
        let (nr, nt) = field.dim();
        debug_assert_eq!(nt, self.n);
        let mut out = Array2::<f64>::zeros((nr, nt));
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        let mut i = 0;
        while i < nr {
            let pair = i + 1 < nr;
            for j in 0..nt {
                let b = if pair { field[[i + 1, j]] } else { 0.0 };
                buf[j] = Complex64::new(field[[i, j]], b);
            }
            self.fwd.process(&mut buf);
            for (z, m) in buf.iter_mut().zip(mult) {
                *z *= m;
            }
            self.inv.process(&mut buf);
            let s = 1.0 / nt as f64;
            for j in 0..nt {
                out[[i, j]] = buf[j].re * s;
                if pair {
                    out[[i + 1, j]] = buf[j].im * s;
                }
            }
            i += 2;
        }
        out
    }

    pub fn derivative_rows(&self, field: &Array2<f64>, order: u32) -> Array2<f64> {
        if order == 0 {
            return field.clone();
        }
        self.apply_rows(field, &self.derivative_multiplier(order))
    }

    /// Fourier coefficients of every row.
    pub fn row_coefficients(&self, field: &Array2<f64>) -> Array2<Complex64> {
        let (nr, nt) = field.dim();
        let mut out = Array2::<Complex64>::zeros((nr, nt));
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        let s = 1.0 / nt as f64;
        let mut i = 0;
        while i < nr {
            let pair = i + 1 < nr;
            for j in 0..nt {
                let b = if pair { field[[i + 1, j]] } else { 0.0 };
                buf[j] = Complex64::new(field[[i, j]], b);
            }
            self.fwd.process(&mut buf);
            for idx in 0..nt {
                let z = buf[idx];
                let zm = buf[(nt - idx) % nt].conj();
                out[[i, idx]] = (z + zm) * 0.5 * s;
                if pair {
                    out[[i + 1, idx]] = (z - zm) * Complex64::new(0.0, -0.5) * s;
                }
            }
            i += 2;
        }
        out
    }

    /// Real synthesis of every row from Hermitian coefficient rows.
    pub fn synthesize_rows(&self, coeffs: &Array2<Complex64>) -> Array2<f64> {
        let (nr, nt) = coeffs.dim();
        let mut out = Array2::<f64>::zeros((nr, nt));
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        let mut i = 0;
        let iu = Complex64::new(0.0, 1.0);
        while i < nr {
            let pair = i + 1 < nr;
            for idx in 0..nt {
                let b = if pair { coeffs[[i + 1, idx]] } else { Complex64::new(0.0, 0.0) };
                buf[idx] = coeffs[[i, idx]] + iu * b;
            }
            self.inv.process(&mut buf);
            for j in 0..nt {
                out[[i, j]] = buf[j].re;
                if pair {
                    out[[i + 1, j]] = buf[j].im;
                }
            }
            i += 2;
        }
        out
    }
}

/// Sobolev-type boundary norm `|f|_s = sqrt(2π Σ (1+k²)^s |c_k|²)`.
pub fn sobolev_from_coefficients(ang: &Angular, c: &[Complex64], s: f64) -> f64 {
    let mut acc = 0.0;
    for (idx, ck) in c.iter().enumerate() {
        let k = ang.wavenumber(idx) as f64;
        acc += (1.0 + k * k).powf(s) * ck.norm_sqr();
    }
    (2.0 * std::f64::consts::PI * acc).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sine_is_cosine() {
        let ang = Angular::new(32);
        let f: Vec<f64> = (0..32).map(|j| (3.0 * ang.theta(j)).sin()).collect();
        let d = ang.derivative(&f, 1);
        for j in 0..32 {
            assert!((d[j] - 3.0 * (3.0 * ang.theta(j)).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn packed_rows_match_single_rows() {
        let ang = Angular::new(16);
        let field = Array2::from_shape_fn((3, 16), |(i, j)| ((i + 1) as f64 * ang.theta(j)).cos() + i as f64);
        let d = ang.derivative_rows(&field, 2);
        for i in 0..3 {
            let row: Vec<f64> = field.row(i).to_vec();
            let di = ang.derivative(&row, 2);
            for j in 0..16 {
                assert!((d[[i, j]] - di[j]).abs() < 1e-11);
            }
        }
        let c = ang.row_coefficients(&field);
        let back = ang.synthesize_rows(&c);
        for (a, b) in back.iter().zip(field.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
