//! Reference computations that share no code with the solver: Bessel roots,
//! closed-form annulus harmonics, radial shooting for annulus eigenvalues and
//! a front-fixing 1D two-phase Stefan solver.

use serde::Serialize;

use crate::error::{Result, StefanError};

/// `J₀(x)` by its ascending series for `|x| ≤ 12` and the Hankel asymptotic
/// expansion beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 12.0 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..200 {
            term *= q / (m as f64 * m as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else {
        let mut p = 1.0;
        let mut qs = 0.0;
        let mut term: f64 = 1.0;
        let z8 = 8.0 * x;
        // term_k = a_k(0) / x^k of the Hankel expansion; stop before it diverges
        for k in 1..40 {
            let m = (2 * k - 1) as f64;
            let next = term * -(m * m) / (k as f64 * z8);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 1 {
                qs += sign * term;
            } else {
                p += sign * term;
            }
            if term.abs() < 1e-17 {
                break;
            }
        }
        let chi = x - std::f64::consts::FRAC_PI_4;
        (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - qs * chi.sin())
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo * fhi > 0.0 {
        return Err(StefanError::Oracle(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * mid.abs() {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// First positive zero of `J₀`, bracketed in `(2, 3)`.
pub fn bessel_j0_first_zero() -> f64 {
    bisect(2.0, 3.0, bessel_j0).expect("J0 changes sign on (2, 3)")
}

/// First Dirichlet eigenvalue of the disc of radius `r`.
pub fn eigen_oracle_disc(r: f64) -> f64 {
    let j = bessel_j0_first_zero();
    (j / r) * (j / r)
}

/// `q(t) = q₀ e^{−λt}` for an eigenfunction datum.
pub fn eigen_decay(lambda: f64, t: f64) -> f64 {
    (-lambda * t).exp()
}

/// Radial factor of the mode-`k` harmonic on an annulus: `a r^k + b r^{−k}`,
/// or `a + b ln r` for `k = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnnulusMode {
    pub k: u32,
    pub a: f64,
    pub b: f64,
}

impl AnnulusMode {
    pub fn eval(&self, r: f64) -> f64 {
        if self.k == 0 {
            self.a + self.b * r.ln()
        } else {
            let k = self.k as i32;
            self.a * r.powi(k) + self.b * r.powi(-k)
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if self.k == 0 {
            self.b / r
        } else {
            let k = self.k as i32;
            let kf = self.k as f64;
            kf * (self.a * r.powi(k - 1) - self.b * r.powi(-k - 1))
        }
    }
}

/// Mode coefficients with value `inner` at `r_in` and `outer` at `r_out`.
pub fn annulus_harmonic_oracle(k: u32, inner: f64, outer: f64, r_in: f64, r_out: f64) -> Result<AnnulusMode> {
    if !(r_out > r_in && r_in > 0.0) {
        return Err(StefanError::Oracle(format!("need 0 < r_in < r_out, got {r_in}, {r_out}")));
    }
    // Cramer's rule on [[f(r_in), g(r_in)], [f(r_out), g(r_out)]]
    let (f1, g1, f2, g2) = if k == 0 {
        (1.0, r_in.ln(), 1.0, r_out.ln())
    } else {
        let k = k as i32;
        (r_in.powi(k), r_in.powi(-k), r_out.powi(k), r_out.powi(-k))
    };
    let det = f1 * g2 - g1 * f2;
    Ok(AnnulusMode { k, a: (inner * g2 - g1 * outer) / det, b: (f1 * outer - inner * f2) / det })
}

/// Outer-wall condition for radial eigenproblems on an annulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShootingEnd {
    Value,
    Slope,
}

/// Integrates `u'' + u'/r + λu = 0` from `u(r_in) = 0, u'(r_in) = 1`;
/// returns `(u, u')` at `r_out`.
fn shoot(lambda: f64, r_in: f64, r_out: f64, steps: usize) -> (f64, f64) {
    let h = (r_out - r_in) / steps as f64;
    let rhs = |r: f64, y: [f64; 2]| [y[1], -y[1] / r - lambda * y[0]];
    let mut y = [0.0, 1.0];
    let mut r = r_in;
    for _ in 0..steps {
        let k1 = rhs(r, y);
        let k2 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for c in 0..2 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        r += h;
    }
    (y[0], y[1])
}

/// Smallest radially symmetric eigenvalue on the annulus `r_in < r < r_out`
/// with a zero value on the inner circle, by shooting and bisection.
pub fn annulus_eigen_oracle(r_in: f64, r_out: f64, end: ShootingEnd, steps: usize) -> Result<f64> {
    if !(r_out > r_in && r_in > 0.0) {
        return Err(StefanError::Oracle(format!("need 0 < r_in < r_out, got {r_in}, {r_out}")));
    }
    let miss = |lam: f64| {
        let (u, du) = shoot(lam, r_in, r_out, steps);
        match end {
            ShootingEnd::Value => u,
            ShootingEnd::Slope => du,
        }
    };
    let width = r_out - r_in;
    let dl = 0.01 / (width * width);
    let mut lo = dl;
    let f0 = miss(lo);
    let mut hi = lo + dl;
    while miss(hi) * f0 > 0.0 {
        lo = hi;
        hi += dl;
        if hi > 1e3 / (width * width) {
            return Err(StefanError::Oracle("no eigenvalue bracket found".into()));
        }
    }
    bisect(lo, hi, miss)
}

#[derive(Clone, Debug, Serialize)]
pub struct RadialOracleResult {
    pub times: Vec<f64>,
    pub front: Vec<f64>,
    /// Radial nodes and temperatures at `t_end`, minus phase then plus phase.
    pub profile_minus: (Vec<f64>, Vec<f64>),
    pub profile_plus: (Vec<f64>, Vec<f64>),
    /// Relative difference of the final front between the two resolutions.
    pub refinement_error: f64,
    pub resolution: usize,
}

/// Landau-transformed state: `p⁻(ξ)`, `ξ = r/S`; `p⁺(ζ)`, `ζ = (r − S)/(R_o − S)`.
#[derive(Clone)]
struct LandauState {
    inner: Vec<f64>,
    outer: Vec<f64>,
    front: f64,
}

struct Landau {
    m: usize,
    r_outer: f64,
}

impl Landau {
    fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    fn front_speed(&self, s: &LandauState) -> f64 {
        let h = self.h();
        let m = self.m;
        let pi = &s.inner;
        let po = &s.outer;
        let dxi = (3.0 * pi[m] - 4.0 * pi[m - 1] + pi[m - 2]) / (2.0 * h);
        let dzeta = (-3.0 * po[0] + 4.0 * po[1] - po[2]) / (2.0 * h);
        dxi / s.front - dzeta / (self.r_outer - s.front)
    }

    fn rhs(&self, s: &LandauState) -> LandauState {
        let m = self.m;
        let h = self.h();
        let sdot = self.front_speed(s);
        let big_s = s.front;
        let len = self.r_outer - big_s;
        let mut di = vec![0.0; m + 1];
        let p = &s.inner;
        di[0] = 4.0 * (p[1] - p[0]) / (h * h) / (big_s * big_s);
        for i in 1..m {
            let xi = i as f64 * h;
            let pxx = (p[i + 1] - 2.0 * p[i] + p[i - 1]) / (h * h);
            let px = (p[i + 1] - p[i - 1]) / (2.0 * h);
            di[i] = (pxx + px / xi) / (big_s * big_s) + xi * sdot / big_s * px;
        }
        let mut dout = vec![0.0; m + 1];
        let p = &s.outer;
        for i in 1..=m {
            let z = i as f64 * h;
            let next = if i == m { p[m - 1] } else { p[i + 1] };
            let pzz = (next - 2.0 * p[i] + p[i - 1]) / (h * h);
            let pz = (next - p[i - 1]) / (2.0 * h);
            let r = big_s + z * len;
            dout[i] = pzz / (len * len) + pz / (len * r) + sdot * (1.0 - z) / len * pz;
        }
        LandauState { inner: di, outer: dout, front: sdot }
    }

    fn axpy(base: &LandauState, k: &LandauState, a: f64) -> LandauState {
        LandauState {
            inner: base.inner.iter().zip(&k.inner).map(|(x, y)| x + a * y).collect(),
            outer: base.outer.iter().zip(&k.outer).map(|(x, y)| x + a * y).collect(),
            front: base.front + a * k.front,
        }
    }

    fn step(&self, s: &LandauState, dt: f64) -> LandauState {
        let k1 = self.rhs(s);
        let k2 = self.rhs(&Self::axpy(s, &k1, 0.5 * dt));
        let k3 = self.rhs(&Self::axpy(s, &k2, 0.5 * dt));
        let k4 = self.rhs(&Self::axpy(s, &k3, dt));
        let mut out = s.clone();
        let comb = |a: f64, b: f64, c: f64, d: f64| dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
        for i in 0..=self.m {
            out.inner[i] += comb(k1.inner[i], k2.inner[i], k3.inner[i], k4.inner[i]);
            out.outer[i] += comb(k1.outer[i], k2.outer[i], k3.outer[i], k4.outer[i]);
        }
        out.front += comb(k1.front, k2.front, k3.front, k4.front);
        out.inner[self.m] = 0.0;
        out.outer[0] = 0.0;
        out
    }

    fn run(
        &self,
        r0: f64,
        q_minus: &dyn Fn(f64) -> f64,
        q_plus: &dyn Fn(f64) -> f64,
        t_end: f64,
        n_out: usize,
    ) -> Result<(Vec<f64>, Vec<f64>, LandauState)> {
        let m = self.m;
        let h = self.h();
        let mut s = LandauState {
            inner: (0..=m).map(|i| if i == m { 0.0 } else { q_minus(i as f64 * h * r0) }).collect(),
            outer: (0..=m)
                .map(|i| if i == 0 { 0.0 } else { q_plus(r0 + i as f64 * h * (self.r_outer - r0)) })
                .collect(),
            front: r0,
        };
        let mut times = vec![0.0];
        let mut front = vec![r0];
        let mut t = 0.0;
        let n_out = n_out.max(1);
        for k in 1..=n_out {
            let t_next = t_end * k as f64 / n_out as f64;
            while t < t_next {
                let scale = s.front.min(self.r_outer - s.front);
                let dt_max = 0.2 * h * h * scale * scale;
                let dt = dt_max.min(t_next - t);
                s = self.step(&s, dt);
                t = if t_next - t <= dt_max { t_next } else { t + dt };
                if !(s.front > 0.0 && s.front < self.r_outer) || !s.front.is_finite() {
                    return Err(StefanError::Oracle(format!("front left the domain at t = {t:.6}")));
                }
            }
            times.push(t_next);
            front.push(s.front);
        }
        Ok((times, front, s))
    }
}

/// 1D two-phase radial Stefan problem with front speed `Ṡ = ∂_r p⁻ − ∂_r p⁺`
/// at `r = S`, zero temperature on the front and zero flux at `r_outer`.
/// Runs at `m` and `2m` cells per phase and returns the finer solution.
pub fn radial_two_phase_oracle(
    r0: f64,
    r_outer: f64,
    q_minus: &dyn Fn(f64) -> f64,
    q_plus: &dyn Fn(f64) -> f64,
    t_end: f64,
    m: usize,
    n_out: usize,
) -> Result<RadialOracleResult> {
    if !(r0 > 0.0 && r_outer > r0) || m < 8 || !(t_end >= 0.0) {
        return Err(StefanError::Oracle("invalid radial oracle parameters".into()));
    }
    let coarse = Landau { m, r_outer }.run(r0, q_minus, q_plus, t_end, n_out)?;
    let fine_solver = Landau { m: 2 * m, r_outer };
    let (times, front, s) = fine_solver.run(r0, q_minus, q_plus, t_end, n_out)?;
    let fc = *coarse.1.last().expect("nonempty");
    let ff = *front.last().expect("nonempty");
    let refinement_error = ((fc - ff) / ff).abs();
    let h = fine_solver.h();
    let rm: Vec<f64> = (0..=2 * m).map(|i| i as f64 * h * s.front).collect();
    let rp: Vec<f64> = (0..=2 * m).map(|i| s.front + i as f64 * h * (r_outer - s.front)).collect();
    Ok(RadialOracleResult {
        times,
        front,
        profile_minus: (rm, s.inner),
        profile_plus: (rp, s.outer),
        refinement_error,
        resolution: 2 * m,
    })
}
