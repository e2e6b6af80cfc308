//! Harmonic coordinate maps `Ψ±`, their inverse Jacobians `A = (∇Ψ)⁻¹`,
//! determinants `J` and the map velocity `w = Ψ_t`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StefanError};
use crate::geometry::{HeightState, ReferenceGeometry};
use crate::grid::{Phase, PolarGrid};
use crate::harmonic::{harmonic_extension, HarmonicField};
use crate::mollifier::Mollifier;

/// How the map velocity `w` is realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityMode {
    /// Harmonic extension of `h_t N`.
    #[default]
    Analytic,
    /// Difference quotient of consecutive maps.
    FiniteDifference,
}

pub type Mat2Field = [[Array2<f64>; 2]; 2];

#[derive(Clone, Debug)]
pub struct AleMapData {
    pub phase: Phase,
    /// Cartesian components of `Ψ − e`.
    pub disp: [Array2<f64>; 2],
    /// `grad[a][b] = ∂_b Ψ^a`.
    pub grad: Mat2Field,
    /// `a[i][j] = A^i_j`, the inverse of `grad`.
    pub a: Mat2Field,
    pub jac: Array2<f64>,
    pub w: [Array2<f64>; 2],
    pub kappa: f64,
}

impl AleMapData {
    /// Map values `Ψ` at the grid nodes.
    pub fn psi(&self, grid: &PolarGrid) -> [Array2<f64>; 2] {
        let (cs, sn) = grid.trig();
        let mut p1 = self.disp[0].clone();
        let mut p2 = self.disp[1].clone();
        for ((i, j), v) in p1.indexed_iter_mut() {
            *v += grid.r[i] * cs[j];
        }
        for ((i, j), v) in p2.indexed_iter_mut() {
            *v += grid.r[i] * sn[j];
        }
        [p1, p2]
    }

    pub fn identity(grid: &PolarGrid) -> Self {
        let z = grid.zeros();
        let one = &z + 1.0;
        AleMapData {
            phase: grid.phase,
            disp: [z.clone(), z.clone()],
            grad: [[one.clone(), z.clone()], [z.clone(), one.clone()]],
            a: [[one.clone(), z.clone()], [z.clone(), one.clone()]],
            jac: one,
            w: [z.clone(), z],
            kappa: 0.0,
        }
    }

    pub fn j_extrema(&self) -> (f64, f64) {
        self.jac.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn is_static(&self) -> bool {
        self.w.iter().all(|c| c.iter().all(|&v| v == 0.0))
    }
}

/// Height samples seen by the geometry: `Λ_κΛ_κ h` when a mollifier is given.
pub fn regularized_samples(geom: &ReferenceGeometry, c: &[num_complex::Complex64], moll: Option<&Mollifier>) -> Vec<f64> {
    let s = HeightState::samples_of(c, &geom.ang);
    match moll {
        Some(m) => m.mollify_twice(&geom.ang, &s),
        None => s,
    }
}

fn require_circle(geom: &ReferenceGeometry) -> Result<()> {
    if !geom.is_circle() {
        return Err(StefanError::UnsupportedGeometry(
            "harmonic maps require an unperturbed circular reference interface".into(),
        ));
    }
    Ok(())
}

/// Harmonic extension of the boundary vector field `f N` (zero on ∂Ω).
pub fn extend_normal_field(geom: &ReferenceGeometry, grid: &PolarGrid, f: &[f64]) -> Result<[HarmonicField; 2]> {
    require_circle(geom)?;
    let nt = grid.n_theta();
    if geom.n_theta() != nt {
        return Err(StefanError::Shape("geometry and grid angular resolutions differ".into()));
    }
    let b1: Vec<f64> = (0..nt).map(|j| f[j] * geom.normal[j][0]).collect();
    let b2: Vec<f64> = (0..nt).map(|j| f[j] * geom.normal[j][1]).collect();
    Ok([harmonic_extension(grid, &b1, None)?, harmonic_extension(grid, &b2, None)?])
}

/// Components of `Ψ − e` for the given (already regularized) height samples.
pub fn solve_harmonic_extension(
    geom: &ReferenceGeometry,
    grid: &PolarGrid,
    h: &HeightState,
    moll: Option<&Mollifier>,
) -> Result<[HarmonicField; 2]> {
    let hs = regularized_samples(geom, &h.coeffs, moll);
    extend_normal_field(geom, grid, &hs)
}

/// Analytic map velocity: harmonic extension of `(Λ_κΛ_κ h_t) N`.
pub fn analytic_velocity(
    geom: &ReferenceGeometry,
    grid: &PolarGrid,
    h: &HeightState,
    moll: Option<&Mollifier>,
) -> Result<[Array2<f64>; 2]> {
    if h.d1.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
        return Ok([grid.zeros(), grid.zeros()]);
    }
    let vs = regularized_samples(geom, &h.d1, moll);
    let [w1, w2] = extend_normal_field(geom, grid, &vs)?;
    Ok([w1.value, w2.value])
}

/// Difference-quotient map velocity `(Ψ_now − Ψ_prev)/dt`.
pub fn finite_difference_velocity(now: &[HarmonicField; 2], prev: &[HarmonicField; 2], dt: f64) -> [Array2<f64>; 2] {
    [
        (&now[0].value - &prev[0].value) / dt,
        (&now[1].value - &prev[1].value) / dt,
    ]
}

/// Assembles `∇Ψ`, `A`, `J` from the displacement and attaches the velocity.
pub fn compute_map_data(
    grid: &PolarGrid,
    disp: &[HarmonicField; 2],
    w: [Array2<f64>; 2],
    kappa: f64,
) -> Result<AleMapData> {
    let [d11, d12] = disp[0].cartesian_gradient(grid);
    let [d21, d22] = disp[1].cartesian_gradient(grid);
    let g11 = d11 + 1.0;
    let g22 = d22 + 1.0;
    let (nr, nt) = grid.shape();
    let mut jac = Array2::<f64>::zeros((nr, nt));
    let mut a11 = jac.clone();
    let mut a12 = jac.clone();
    let mut a21 = jac.clone();
    let mut a22 = jac.clone();
    for i in 0..nr {
        for j in 0..nt {
            let (p, q, r, s) = (g11[[i, j]], d12[[i, j]], d21[[i, j]], g22[[i, j]]);
            let det = p * s - q * r;
            if !(det > 0.0) {
                return Err(StefanError::MapDegeneracy { phase: grid.phase, i, j, jac: det });
            }
            jac[[i, j]] = det;
            a11[[i, j]] = s / det;
            a12[[i, j]] = -q / det;
            a21[[i, j]] = -r / det;
            a22[[i, j]] = p / det;
        }
    }
    Ok(AleMapData {
        phase: grid.phase,
        disp: [disp[0].value.clone(), disp[1].value.clone()],
        grad: [[g11, d12], [d21, g22]],
        a: [[a11, a12], [a21, a22]],
        jac,
        w,
        kappa,
    })
}

/// Discrete polar Laplacian with the grid's radial stencils.
pub fn discrete_laplacian(grid: &PolarGrid, f: &Array2<f64>) -> Array2<f64> {
    let frr = grid.d_rr(f);
    let fr = grid.d_r(f);
    let ftt = grid.ang.derivative_rows(f, 2);
    let mut out = frr;
    for ((i, j), v) in out.indexed_iter_mut() {
        let r = grid.r[i];
        *v += fr[[i, j]] / r + ftt[[i, j]] / (r * r);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct MapValidation {
    pub phase: Phase,
    pub max_a_minus_id: f64,
    pub max_a_grad_minus_id: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub j_min_node: (usize, usize),
    pub harmonic_residual: f64,
    pub pass: bool,
}

/// Inspects a map against its invariants; never mutates.
pub fn validate_map(grid: &PolarGrid, m: &AleMapData, tol: f64) -> MapValidation {
    let (nr, nt) = grid.shape();
    let mut max_a = 0.0f64;
    let mut max_comp = 0.0f64;
    let mut j_min = f64::INFINITY;
    let mut j_max = f64::NEG_INFINITY;
    let mut node = (0, 0);
    for i in 0..nr {
        for j in 0..nt {
            let a = [[m.a[0][0][[i, j]], m.a[0][1][[i, j]]], [m.a[1][0][[i, j]], m.a[1][1][[i, j]]]];
            let g = [[m.grad[0][0][[i, j]], m.grad[0][1][[i, j]]], [m.grad[1][0][[i, j]], m.grad[1][1][[i, j]]]];
            for p in 0..2 {
                let row: f64 = (0..2).map(|q| (a[p][q] - if p == q { 1.0 } else { 0.0 }).abs()).sum();
                max_a = max_a.max(row);
                for q in 0..2 {
                    let prod = a[p][0] * g[0][q] + a[p][1] * g[1][q];
                    max_comp = max_comp.max((prod - if p == q { 1.0 } else { 0.0 }).abs());
                }
            }
            let jv = m.jac[[i, j]];
            if jv < j_min {
                j_min = jv;
                node = (i, j);
            }
            j_max = j_max.max(jv);
        }
    }
    let mut resid = 0.0f64;
    let interior: Vec<usize> = (0..nr)
        .filter(|&i| i != grid.gamma_row() && Some(i) != grid.outer_row())
        .collect();
    for c in &m.disp {
        let scale = c.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if scale == 0.0 {
            continue;
        }
        let lap = discrete_laplacian(grid, c);
        for &i in &interior {
            for j in 0..nt {
                resid = resid.max(lap[[i, j]].abs() / scale);
            }
        }
    }
    let pass = j_min >= 0.5 && j_max <= 1.5 && max_comp <= 1e-10 && resid <= tol;
    MapValidation {
        phase: m.phase,
        max_a_minus_id: max_a,
        max_a_grad_minus_id: max_comp,
        j_min,
        j_max,
        j_min_node: node,
        harmonic_residual: resid,
        pass,
    }
}
