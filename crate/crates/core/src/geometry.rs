//! Reference interface Γ, outer boundary ∂Ω, tangential calculus on Γ and the
//! normal geometry of the moving interface `x + h N`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StefanError};
use crate::fourier::Angular;

/// One real Fourier mode `amp_cos cos(kθ) + amp_sin sin(kθ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub k: u32,
    pub amp_cos: f64,
    pub amp_sin: f64,
}

impl FourierMode {
    pub fn cos(k: u32, amp: f64) -> Self {
        FourierMode { k, amp_cos: amp, amp_sin: 0.0 }
    }

    fn value(&self, th: f64) -> [f64; 3] {
        let k = self.k as f64;
        let (s, c) = (k * th).sin_cos();
        [
            self.amp_cos * c + self.amp_sin * s,
            k * (-self.amp_cos * s + self.amp_sin * c),
            -k * k * (self.amp_cos * c + self.amp_sin * s),
        ]
    }
}

/// Sign convention for the curvature.
///
/// `Formula` keeps `H = (z₂'z₁'' − z₁'z₂'')/|z'|³` as written, which is `−1/R`
/// on a counterclockwise circle. `Flipped` negates it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureConvention {
    #[default]
    Formula,
    Flipped,
}

#[derive(Clone, Debug)]
pub struct ReferenceGeometry {
    pub r_gamma: f64,
    pub r_outer: f64,
    pub ang: Angular,
    pub theta: Vec<f64>,
    pub z: Vec<[f64; 2]>,
    pub dz: Vec<[f64; 2]>,
    pub ddz: Vec<[f64; 2]>,
    /// Unit normal pointing into Ω⁺.
    pub normal: Vec<[f64; 2]>,
    pub tangent: Vec<[f64; 2]>,
    pub curvature: Vec<f64>,
    /// `|z'(θ)|`.
    pub speed: Vec<f64>,
    pub perturb: Vec<FourierMode>,
    pub convention: CurvatureConvention,
}

impl ReferenceGeometry {
    pub fn build(
        r_gamma: f64,
        r_outer: f64,
        n_theta: usize,
        perturb: &[FourierMode],
        convention: CurvatureConvention,
    ) -> Result<Self> {
        if !(r_gamma > 0.0 && r_outer > r_gamma) {
            return Err(StefanError::InvalidGeometry(format!(
                "radii must satisfy 0 < r_gamma < r_outer, got {r_gamma} and {r_outer}"
            )));
        }
        if n_theta < 32 || !n_theta.is_power_of_two() {
            return Err(StefanError::InvalidGeometry(format!(
                "n_theta must be a power of two >= 32, got {n_theta}"
            )));
        }
        let ang = Angular::new(n_theta);
        let mut g = ReferenceGeometry {
            r_gamma,
            r_outer,
            theta: (0..n_theta).map(|j| ang.theta(j)).collect(),
            ang,
            z: Vec::with_capacity(n_theta),
            dz: Vec::with_capacity(n_theta),
            ddz: Vec::with_capacity(n_theta),
            normal: Vec::with_capacity(n_theta),
            tangent: Vec::with_capacity(n_theta),
            curvature: Vec::with_capacity(n_theta),
            speed: Vec::with_capacity(n_theta),
            perturb: perturb.to_vec(),
            convention,
        };
        let sign = match convention {
            CurvatureConvention::Formula => 1.0,
            CurvatureConvention::Flipped => -1.0,
        };
        let mut min_rho = f64::INFINITY;
        let mut max_rho = f64::NEG_INFINITY;
        for &th in &g.theta {
            let mut rho = [r_gamma, 0.0, 0.0];
            for m in perturb {
                let v = m.value(th);
                for d in 0..3 {
                    rho[d] += v[d];
                }
            }
            min_rho = min_rho.min(rho[0]);
            max_rho = max_rho.max(rho[0]);
            let (s, c) = th.sin_cos();
            let z = [rho[0] * c, rho[0] * s];
            let dz = [rho[1] * c - rho[0] * s, rho[1] * s + rho[0] * c];
            let ddz = [
                rho[2] * c - 2.0 * rho[1] * s - rho[0] * c,
                rho[2] * s + 2.0 * rho[1] * c - rho[0] * s,
            ];
            let sp = dz[0].hypot(dz[1]);
            let h = sign * (dz[1] * ddz[0] - dz[0] * ddz[1]) / sp.powi(3);
            g.z.push(z);
            g.dz.push(dz);
            g.ddz.push(ddz);
            g.tangent.push([dz[0] / sp, dz[1] / sp]);
            g.normal.push([dz[1] / sp, -dz[0] / sp]);
            g.curvature.push(h);
            g.speed.push(sp);
        }
        if min_rho <= 0.0 {
            return Err(StefanError::InvalidGeometry(
                "perturbed interface reaches the origin (curve not simple)".into(),
            ));
        }
        if max_rho >= r_outer {
            return Err(StefanError::InvalidGeometry("perturbed interface touches the outer boundary".into()));
        }
        Ok(g)
    }

    pub fn circle(r_gamma: f64, r_outer: f64, n_theta: usize) -> Result<Self> {
        Self::build(r_gamma, r_outer, n_theta, &[], CurvatureConvention::Formula)
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn is_circle(&self) -> bool {
        self.perturb.iter().all(|m| m.amp_cos == 0.0 && m.amp_sin == 0.0)
    }

    /// Winding number of the sampled curve about the origin.
    pub fn winding_number(&self) -> i64 {
        let n = self.n_theta();
        let mut total = 0.0;
        for j in 0..n {
            let a = self.z[j];
            let b = self.z[(j + 1) % n];
            let cross = a[0] * b[1] - a[1] * b[0];
            let dot = a[0] * b[0] + a[1] * b[1];
            total += cross.atan2(dot);
        }
        (total / (2.0 * std::f64::consts::PI)).round() as i64
    }

    /// `∂̄f = |z'|⁻¹ df/dθ`, spectral in θ.
    pub fn tangential_derivative(&self, f: &[f64]) -> Vec<f64> {
        let d = self.ang.derivative(f, 1);
        d.iter().zip(&self.speed).map(|(a, s)| a / s).collect()
    }

    /// Sample-wise `1 + H h`.
    pub fn one_plus_hh(&self, h: &[f64]) -> Vec<f64> {
        h.iter().zip(&self.curvature).map(|(hv, k)| 1.0 + k * hv).collect()
    }
}

/// Interface height as a truncated real Fourier series plus stored time
/// derivatives. `coeffs[k]` is `ĥ_k` for `k = 0..=k_max`; negative modes are
/// the conjugates.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightState {
    pub coeffs: Vec<Complex64>,
    pub d1: Vec<Complex64>,
    pub d2: Option<Vec<Complex64>>,
    pub d3: Option<Vec<Complex64>>,
    pub t: f64,
}

impl HeightState {
    pub fn zero(k_max: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); k_max + 1];
        HeightState { coeffs: z.clone(), d1: z, d2: None, d3: None, t: 0.0 }
    }

    pub fn from_modes(modes: &[FourierMode], k_max: usize) -> Self {
        let mut h = Self::zero(k_max);
        for m in modes {
            let k = m.k as usize;
            if k > k_max {
                continue;
            }
            if k == 0 {
                h.coeffs[0] += Complex64::new(m.amp_cos, 0.0);
            } else {
                h.coeffs[k] += Complex64::new(0.5 * m.amp_cos, -0.5 * m.amp_sin);
            }
        }
        h
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients laid out on the full FFT index set of `ang`.
    pub fn full_spectrum(c: &[Complex64], ang: &Angular) -> Vec<Complex64> {
        let n = ang.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, &ck) in c.iter().enumerate() {
            if k > n / 2 {
                break;
            }
            if k == 0 {
                out[0] = Complex64::new(ck.re, 0.0);
            } else if k == n / 2 {
                out[k] += Complex64::new(2.0 * ck.re, 0.0);
            } else {
                out[k] = ck;
                out[n - k] = ck.conj();
            }
        }
        out
    }

    /// Truncated coefficients `0..=k_max` of real samples.
    pub fn truncate_samples(ang: &Angular, f: &[f64], k_max: usize) -> Vec<Complex64> {
        let c = ang.coefficients(f);
        (0..=k_max)
            .map(|k| if k == 0 { Complex64::new(c[0].re, 0.0) } else { c[k] })
            .collect()
    }

    pub fn samples_of(c: &[Complex64], ang: &Angular) -> Vec<f64> {
        ang.synthesize(&Self::full_spectrum(c, ang))
    }

    pub fn samples(&self, ang: &Angular) -> Vec<f64> {
        Self::samples_of(&self.coeffs, ang)
    }

    pub fn velocity_samples(&self, ang: &Angular) -> Vec<f64> {
        Self::samples_of(&self.d1, ang)
    }
}

/// Normal data of the moving interface at each sample of Γ.
#[derive(Clone, Debug)]
pub struct MovingNormal {
    pub n: Vec<[f64; 2]>,
    pub n_tilde: Vec<[f64; 2]>,
    pub g: Vec<f64>,
    pub one_plus_hh: Vec<f64>,
    pub dh: Vec<f64>,
}

/// `n = (−∂̄h τ + (1+Hh) N)/√g`, `ñ = N − ∂̄h/(1+Hh) τ`, `g = (∂̄h)² + (1+Hh)²`.
pub fn moving_normal(geom: &ReferenceGeometry, h: &[f64]) -> Result<MovingNormal> {
    let dh = geom.tangential_derivative(h);
    let oph = geom.one_plus_hh(h);
    let n_s = h.len();
    let mut out = MovingNormal {
        n: Vec::with_capacity(n_s),
        n_tilde: Vec::with_capacity(n_s),
        g: Vec::with_capacity(n_s),
        one_plus_hh: oph.clone(),
        dh: dh.clone(),
    };
    for j in 0..n_s {
        if !(oph[j] > 0.0) {
            return Err(StefanError::DegenerateInterface(format!(
                "1 + H h = {:.3e} <= 0 at sample {j}",
                oph[j]
            )));
        }
        let g = dh[j] * dh[j] + oph[j] * oph[j];
        let sg = g.sqrt();
        let (nn, tt) = (geom.normal[j], geom.tangent[j]);
        out.n.push([(-dh[j] * tt[0] + oph[j] * nn[0]) / sg, (-dh[j] * tt[1] + oph[j] * nn[1]) / sg]);
        let ratio = dh[j] / oph[j];
        out.n_tilde.push([nn[0] - ratio * tt[0], nn[1] - ratio * tt[1]]);
        out.g.push(g);
    }
    Ok(out)
}

/// Checks the admissibility conditions of a height profile.
pub fn check_height(geom: &ReferenceGeometry, h: &[f64]) -> Result<()> {
    let sup = h.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if !sup.is_finite() {
        return Err(StefanError::DegenerateInterface("non-finite interface height".into()));
    }
    if sup >= geom.r_gamma || sup >= geom.r_outer - geom.r_gamma {
        return Err(StefanError::DegenerateInterface(format!(
            "interface height {sup:.3e} leaves the region between origin and outer wall"
        )));
    }
    let mn = moving_normal(geom, h)?;
    if let Some(j) = mn.g.iter().position(|&g| !(g > 0.0)) {
        return Err(StefanError::DegenerateInterface(format!("g vanishes at sample {j}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_curvature_follows_formula_sign() {
        let g = ReferenceGeometry::circle(2.0, 3.0, 64).unwrap();
        for &h in &g.curvature {
            assert!((h + 0.5).abs() < 1e-13);
        }
        assert_eq!(g.winding_number(), 1);
    }

    #[test]
    fn height_roundtrip_through_samples() {
        let ang = Angular::new(32);
        let h = HeightState::from_modes(&[FourierMode { k: 3, amp_cos: 0.2, amp_sin: -0.1 }], 8);
        let s = h.samples(&ang);
        for (j, v) in s.iter().enumerate() {
            let th = ang.theta(j);
            assert!((v - (0.2 * (3.0 * th).cos() - 0.1 * (3.0 * th).sin())).abs() < 1e-14);
        }
        let back = HeightState::truncate_samples(&ang, &s, 8);
        for (a, b) in back.iter().zip(&h.coeffs) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
