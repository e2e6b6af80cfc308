//! First eigenpairs of the reference domains and the decay constants built
//! from them and from the initial temperatures.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::ale::{discrete_laplacian, AleMapData};
use crate::diagnostics::norms::interior_sobolev_norm;
use crate::error::{Result, StefanError};
use crate::geometry::ReferenceGeometry;
use crate::grid::{Phase, PolarGrid};
use crate::heat::{ale_correction, outer_flux_residual, PhaseField};
use crate::interface::{gamma_trace, interface_velocity};
use crate::modal::{ModalSystem, OuterRow};

/// Boundary condition on the outer wall of the annulus for eigenproblems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OuterCondition {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    /// L²-normalized, positive inside.
    pub function: Array2<f64>,
    pub iterations: usize,
}

const EIGEN_TOL: f64 = 1e-12;
const EIGEN_MAX_ITER: usize = 1000;

fn initial_guess(grid: &PolarGrid, outer: OuterCondition) -> Array2<f64> {
    let (r0, r1) = (grid.r_gamma, grid.r_outer);
    Array2::from_shape_fn(grid.shape(), |(i, _)| {
        let r = grid.r[i];
        match grid.phase {
            Phase::Minus => r0 * r0 - r * r,
            Phase::Plus => match outer {
                OuterCondition::Dirichlet => (r - r0) * (r1 - r),
                OuterCondition::Neumann => (r - r0) * (2.0 * r1 - r0 - r),
            },
        }
    })
}

/// Inverse power iteration for the smallest eigenvalue of `−Δ` with Dirichlet
/// data on Γ and the requested condition on the outer wall.
pub fn first_eigenpair(grid: &PolarGrid, outer: OuterCondition) -> Result<Eigenpair> {
    let row = match outer {
        OuterCondition::Dirichlet => OuterRow::Value,
        OuterCondition::Neumann => OuterRow::Slope,
    };
    let sys = ModalSystem::build(grid, 0.0, -1.0, grid.n_theta() / 2, row)?;
    let mut x = initial_guess(grid, outer);
    let norm = grid.l2_norm(&x);
    x /= norm;
    let mut lambda = f64::NAN;
    for it in 1..=EIGEN_MAX_ITER {
        let y = sys.solve(grid, &x, None);
        let yy = grid.integrate_product(&y, &y);
        let est = grid.integrate_product(&y, &x) / yy;
        x = y / yy.sqrt();
        if (est - lambda).abs() < EIGEN_TOL * est.abs() {
            if x.sum() < 0.0 {
                x.mapv_inplace(|v| -v);
            }
            return Ok(Eigenpair { value: est, function: x, iterations: it });
        }
        lambda = est;
    }
    Err(StefanError::NonConvergence(format!(
        "inverse iteration for the {} phase stalled after {EIGEN_MAX_ITER} iterations",
        grid.phase
    )))
}

/// `∂_N f` along Γ (N points into Ω⁺) using the boundary-row stencil.
pub fn normal_derivative_on_gamma(grid: &PolarGrid, f: &Array2<f64>) -> Vec<f64> {
    let i = grid.gamma_row();
    let st = grid.first_stencil(i);
    (0..grid.n_theta())
        .map(|j| st.offsets.iter().zip(&st.weights).map(|(&o, &w)| w * f[[(i as i64 + o) as usize, j]]).sum())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralConstants {
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub lambda1_minus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub lambda1_plus: f64,
    /// Dirichlet on Γ, Neumann on ∂Ω; governs the observed decay of `q⁺`.
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub lambda1_plus_mixed: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub lambda1: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub eta: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub c1_minus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub c1_plus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub k_norm_minus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub k_norm_plus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub k_rt_minus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub k_rt_plus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub beta_minus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub beta_plus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub sigma_minus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub sigma_plus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub gamma_minus: f64,
    #[serde(deserialize_with = "crate::io::f64_or_nan")]
    pub gamma_plus: f64,
}

impl SpectralConstants {
    /// Rate constants from the eigenvalues alone; data-dependent fields are NaN.
    pub fn from_eigenvalues(lambda1_minus: f64, lambda1_plus: f64, lambda1_plus_mixed: f64, eta: f64) -> Self {
        let lambda1 = lambda1_minus.min(lambda1_plus);
        SpectralConstants {
            lambda1_minus,
            lambda1_plus,
            lambda1_plus_mixed,
            lambda1,
            eta,
            c1_minus: f64::NAN,
            c1_plus: f64::NAN,
            k_norm_minus: f64::NAN,
            k_norm_plus: f64::NAN,
            k_rt_minus: f64::NAN,
            k_rt_plus: f64::NAN,
            beta_minus: 2.0 * lambda1_minus - eta,
            beta_plus: 2.0 * lambda1_plus - eta,
            sigma_minus: lambda1_minus - lambda1 + 0.5 * eta,
            sigma_plus: lambda1_plus - lambda1 + 0.5 * eta,
            gamma_minus: 2.0 * lambda1_minus - lambda1,
            gamma_plus: 2.0 * lambda1_plus - lambda1,
        }
    }

    pub fn lambda(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.lambda1_minus,
            Phase::Plus => self.lambda1_plus,
        }
    }

    pub fn c1(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.c1_minus,
            Phase::Plus => self.c1_plus,
        }
    }

    pub fn beta(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.beta_minus,
            Phase::Plus => self.beta_plus,
        }
    }

    pub fn sigma(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.sigma_minus,
            Phase::Plus => self.sigma_plus,
        }
    }

    pub fn k_norm(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.k_norm_minus,
            Phase::Plus => self.k_norm_plus,
        }
    }

    /// `0 < η < λ₁`.
    pub fn check_eta(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < self.lambda1) {
            return Err(crate::config::ConfigError::single(format!(
                "analysis.eta = {} must satisfy 0 < eta < lambda1 = {:.6} (eta is a small constant relative to the smallest first eigenvalue)",
                self.eta, self.lambda1
            ))
            .into());
        }
        Ok(())
    }
}

/// Projection, norm-ratio and Rayleigh-Taylor ratio of one phase's data.
#[derive(Clone, Copy, Debug)]
pub struct DataConstants {
    pub c1: f64,
    pub k_norm: f64,
    pub k_rt: f64,
}

pub fn data_constants(grid: &PolarGrid, q0: &Array2<f64>, phi: &Array2<f64>) -> Result<DataConstants> {
    let c1 = grid.integrate_product(q0, phi);
    // roundoff-level projections count as zero
    let scale = grid.l2_norm(q0) * grid.l2_norm(phi);
    if c1.abs() <= 1e-12 * scale || !c1.is_finite() {
        return Err(StefanError::DegenerateData(format!(
            "initial temperature of the {} phase has zero projection on the first eigenfunction",
            grid.phase
        )));
    }
    let n0 = interior_sobolev_norm(grid, q0, 0.0, false)?;
    let n4 = interior_sobolev_norm(grid, q0, 4.0, true)?;
    let dn = normal_derivative_on_gamma(grid, q0);
    let min_dn = dn.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DataConstants { c1, k_norm: n4 / n0, k_rt: min_dn / c1.abs() })
}

/// All constants; fails when either phase has zero projection.
pub fn derived_constants(
    grids: [&PolarGrid; 2],
    q0: [&Array2<f64>; 2],
    phi: [&Array2<f64>; 2],
    eigenvalues: (f64, f64, f64),
    eta: f64,
) -> Result<SpectralConstants> {
    let dm = data_constants(grids[0], q0[0], phi[0])?;
    let dp = data_constants(grids[1], q0[1], phi[1])?;
    let mut c = SpectralConstants::from_eigenvalues(eigenvalues.0, eigenvalues.1, eigenvalues.2, eta);
    c.c1_minus = dm.c1;
    c.c1_plus = dp.c1;
    c.k_norm_minus = dm.k_norm;
    c.k_norm_plus = dp.k_norm;
    c.k_rt_minus = dm.k_rt;
    c.k_rt_plus = dp.k_rt;
    Ok(c)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseAdmissibility {
    pub phase: Phase,
    pub min_normal_derivative: f64,
    pub rt_ok: bool,
    pub sign_ok: bool,
    /// `max_Γ |Δ_Ψ q₀ + (Aᵀ∇q₀·N) g₁|`.
    pub compat1_residual: f64,
    /// `max_Γ |L(L q₀)|`, the size of `q_tt` on Γ at `t = 0`.
    pub compat2_magnitude: f64,
    /// `max_∂Ω |v·N|` (plus phase).
    pub outer_flux_residual: f64,
    /// `max_∂Ω |∂_t (v·N)|` from `q_t = L q₀` (plus phase).
    pub outer_flux_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub delta: f64,
    pub phases: Vec<PhaseAdmissibility>,
    pub initial_front_speed: Vec<f64>,
    pub admissible: bool,
}

/// Evaluates the sign, Rayleigh-Taylor and compatibility conditions of the
/// initial data. `maps` are the maps of `h₀` (their velocity is replaced by
/// the extension of the initial front speed).
pub fn check_admissibility(
    geom: &ReferenceGeometry,
    grids: [&PolarGrid; 2],
    maps: [&AleMapData; 2],
    q0: [&Array2<f64>; 2],
    h_geom: &[f64],
    delta: f64,
) -> Result<AdmissibilityReport> {
    let fields: Vec<PhaseField> = (0..2)
        .map(|p| PhaseField::new(grids[p], q0[p].clone(), maps[p], 0.0))
        .collect::<Result<_>>()?;
    let g1 = interface_velocity(
        &gamma_trace(grids[1], &fields[1]),
        &gamma_trace(grids[0], &fields[0]),
        geom,
        h_geom,
    )?;
    let mut phases = Vec::new();
    for p in 0..2 {
        let grid = grids[p];
        let mut map = maps[p].clone();
        let [w1, w2] = crate::ale::extend_normal_field(geom, grid, &g1)?;
        map.w = [w1.value, w2.value];
        let q = q0[p];
        let dn = normal_derivative_on_gamma(grid, q);
        let min_dn = dn.iter().copied().fold(f64::INFINITY, f64::min);
        let gi = grid.gamma_row();
        let sign = match grid.phase {
            Phase::Minus => 1.0,
            Phase::Plus => -1.0,
        };
        let sign_ok = q
            .indexed_iter()
            .filter(|((i, _), _)| *i != gi)
            .all(|(_, &v)| sign * v < 0.0);
        let full = |f: &Array2<f64>| -> Array2<f64> { discrete_laplacian(grid, f) + ale_correction(grid, f, &map) };
        let lq = full(q);
        let compat1 = lq.row(gi).iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut lq_dirichlet = lq.clone();
        lq_dirichlet.row_mut(gi).fill(0.0);
        let llq = full(&lq_dirichlet);
        let compat2 = llq.row(gi).iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let (outer_res, outer_rate) = if grid.phase == Phase::Plus {
            let r0 = outer_flux_residual(grid, q, &map);
            let r1 = outer_flux_residual(grid, &lq_dirichlet, &map);
            (
                r0.iter().fold(0.0f64, |a, b| a.max(b.abs())),
                r1.iter().fold(0.0f64, |a, b| a.max(b.abs())),
            )
        } else {
            (0.0, 0.0)
        };
        phases.push(PhaseAdmissibility {
            phase: grid.phase,
            min_normal_derivative: min_dn,
            rt_ok: min_dn >= delta,
            sign_ok,
            compat1_residual: compat1,
            compat2_magnitude: compat2,
            outer_flux_residual: outer_res,
            outer_flux_rate: outer_rate,
        });
    }
    let admissible = phases.iter().all(|p| p.rt_ok && p.sign_ok);
    Ok(AdmissibilityReport { delta, phases, initial_front_speed: g1, admissible })
}
