//! Pulled-back heat equation `q_t − Δ_Ψ q = −v·w` with `v = −Aᵀ∇q`,
//! advanced by an IMEX step: flat Laplacian implicit, ALE correction explicit.

use ndarray::Array2;

use crate::ale::{discrete_laplacian, AleMapData};
use crate::error::{Result, StefanError};
use crate::grid::{Phase, PolarGrid};
use crate::modal::ModalSystem;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    pub phase: Phase,
    pub q: Array2<f64>,
    pub v: [Array2<f64>; 2],
    pub t: f64,
}

impl PhaseField {
    pub fn zero(grid: &PolarGrid) -> Self {
        PhaseField { phase: grid.phase, q: grid.zeros(), v: [grid.zeros(), grid.zeros()], t: 0.0 }
    }

    pub fn new(grid: &PolarGrid, q: Array2<f64>, map: &AleMapData, t: f64) -> Result<Self> {
        let v = compute_gradient_v(grid, &q, map)?;
        Ok(PhaseField { phase: grid.phase, q, v, t })
    }
}

fn check_shapes(grid: &PolarGrid, q: &Array2<f64>, map: &AleMapData) -> Result<()> {
    if !grid.same_shape(q) || !grid.same_shape(&map.jac) || map.phase != grid.phase {
        return Err(StefanError::Shape(format!(
            "field {:?} / map {:?} ({}) do not match the {} grid {:?}",
            q.dim(),
            map.jac.dim(),
            map.phase,
            grid.phase,
            grid.shape()
        )));
    }
    Ok(())
}

/// `Aᵀ g` for a Cartesian vector field `g`.
fn a_transpose_times(map: &AleMapData, g: &[Array2<f64>; 2]) -> [Array2<f64>; 2] {
    let a = &map.a;
    [
        &a[0][0] * &g[0] + &a[1][0] * &g[1],
        &a[0][1] * &g[0] + &a[1][1] * &g[1],
    ]
}

/// `v = −Aᵀ∇q`.
pub fn compute_gradient_v(grid: &PolarGrid, q: &Array2<f64>, map: &AleMapData) -> Result<[Array2<f64>; 2]> {
    check_shapes(grid, q, map)?;
    let g = grid.gradient(q);
    let [a, b] = a_transpose_times(map, &g);
    Ok([-a, -b])
}

fn map_is_flat(map: &AleMapData) -> bool {
    let id = |m: &Array2<f64>, d: f64| m.iter().all(|&v| v == d);
    id(&map.a[0][0], 1.0) && id(&map.a[1][1], 1.0) && id(&map.a[0][1], 0.0) && id(&map.a[1][0], 0.0)
}

/// Explicit part of the ALE operator: `(Δ_Ψ − Δ) q + (Aᵀ∇q)·w`, arranged so
/// that it vanishes exactly on the identity map.
pub fn ale_correction(grid: &PolarGrid, q: &Array2<f64>, map: &AleMapData) -> Array2<f64> {
    let flat = map_is_flat(map);
    let still = map.is_static();
    if flat && still {
        return grid.zeros();
    }
    let g = grid.gradient(q);
    let mut out = grid.zeros();
    if !flat {
        let d = |i: usize, j: usize| -> Array2<f64> {
            if i == j {
                &map.a[i][j] - 1.0
            } else {
                map.a[i][j].clone()
            }
        };
        let dm = [[d(0, 0), d(0, 1)], [d(1, 0), d(1, 1)]];
        // e_j = Σ_i D_ij g_i
        let e = [&dm[0][0] * &g[0] + &dm[1][0] * &g[1], &dm[0][1] * &g[0] + &dm[1][1] * &g[1]];
        let grad_e = [grid.gradient(&e[0]), grid.gradient(&e[1])];
        let grad_g = [grid.gradient(&g[0]), grid.gradient(&g[1])];
        out += &grad_e[0][0];
        out += &grad_e[1][1];
        for j in 0..2 {
            for i in 0..2 {
                let dg = &grad_g[j][i] + &grad_e[j][i];
                out += &(&dm[i][j] * &dg);
            }
        }
    }
    if !still {
        let gg = a_transpose_times(map, &g);
        out += &(&gg[0] * &map.w[0]);
        out += &(&gg[1] * &map.w[1]);
    }
    out
}

/// Full right-hand side `Δ_Ψ q − v·w` (zero on Γ), used for `q_t` diagnostics.
pub fn heat_rhs(grid: &PolarGrid, q: &Array2<f64>, map: &AleMapData) -> Array2<f64> {
    let mut out = discrete_laplacian(grid, q);
    out += &ale_correction(grid, q, map);
    out.row_mut(grid.gamma_row()).fill(0.0);
    out
}

/// Outer-wall coefficient `c` with `∂_r q = c ∂_θ q / r` equivalent to `v·N = 0`.
fn neumann_coefficient(grid: &PolarGrid, map: &AleMapData) -> Vec<f64> {
    let o = grid.outer_row().expect("outer row");
    let (cs, sn) = grid.trig();
    (0..grid.n_theta())
        .map(|j| {
            // A e_r
            let ar = [
                map.a[0][0][[o, j]] * cs[j] + map.a[0][1][[o, j]] * sn[j],
                map.a[1][0][[o, j]] * cs[j] + map.a[1][1][[o, j]] * sn[j],
            ];
            let radial = ar[0] * cs[j] + ar[1] * sn[j];
            let angular = -ar[0] * sn[j] + ar[1] * cs[j];
            -angular / radial
        })
        .collect()
}

fn outer_slope(grid: &PolarGrid, q: &Array2<f64>, coef: &[f64]) -> Vec<f64> {
    let o = grid.outer_row().expect("outer row");
    if coef.iter().all(|&c| c == 0.0) {
        return vec![0.0; grid.n_theta()];
    }
    let row: Vec<f64> = q.row(o).to_vec();
    let dq = grid.ang.derivative(&row, 1);
    let r = grid.r[o];
    dq.iter().zip(coef).map(|(d, c)| c * d / r).collect()
}

/// Discrete outer-wall flux `v·N` with the one-sided boundary stencil.
pub fn outer_flux_residual(grid: &PolarGrid, q: &Array2<f64>, map: &AleMapData) -> Vec<f64> {
    let o = match grid.outer_row() {
        Some(o) => o,
        None => return Vec::new(),
    };
    let coef = neumann_coefficient(grid, map);
    let slope = outer_slope(grid, q, &coef);
    let st = grid.first_stencil(o);
    (0..grid.n_theta())
        .map(|j| {
            let dr: f64 = st.offsets.iter().zip(&st.weights).map(|(&off, &w)| w * q[[(o as i64 + off) as usize, j]]).sum();
            dr - slope[j]
        })
        .collect()
}

const BC_MAX_SWEEPS: usize = 200;

/// Zeroes the Γ row and, for the plus phase, sets the outer row so that the
/// discrete ALE flux through ∂Ω vanishes.
pub fn apply_boundary_conditions(grid: &PolarGrid, q: &Array2<f64>, map: &AleMapData) -> Array2<f64> {
    let mut out = q.clone();
    out.row_mut(grid.gamma_row()).fill(0.0);
    let o = match grid.outer_row() {
        Some(o) => o,
        None => return out,
    };
    let coef = neumann_coefficient(grid, map);
    let st = grid.first_stencil(o);
    let w_self = *st.weights.last().expect("stencil");
    debug_assert_eq!(*st.offsets.last().unwrap(), 0);
    let nt = grid.n_theta();
    let interior: Vec<f64> = (0..nt)
        .map(|j| {
            st.offsets
                .iter()
                .zip(&st.weights)
                .filter(|(&off, _)| off != 0)
                .map(|(&off, &w)| w * out[[(o as i64 + off) as usize, j]])
                .sum()
        })
        .collect();
    for _ in 0..BC_MAX_SWEEPS {
        let slope = outer_slope(grid, &out, &coef);
        let mut change = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..nt {
            let new = (slope[j] - interior[j]) / w_self;
            change = change.max((new - out[[o, j]]).abs());
            scale = scale.max(new.abs());
            out[[o, j]] = new;
        }
        if change <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    out
}

/// Largest stable step for the explicit advection term.
pub fn advective_cfl_bound(grid: &PolarGrid, map: &AleMapData, c_adv: f64) -> f64 {
    let mut bound = f64::INFINITY;
    for i in 0..grid.n_r() {
        let dx = grid.local_spacing(i);
        for j in 0..grid.n_theta() {
            let speed = map.w[0][[i, j]].hypot(map.w[1][[i, j]]);
            if speed > 0.0 {
                bound = bound.min(c_adv * dx / speed);
            }
        }
    }
    bound
}

/// Factorized implicit operator for a fixed time step.
#[derive(Debug)]
pub struct HeatStepper {
    pub dt: f64,
    system: ModalSystem,
}

impl HeatStepper {
    pub fn new(grid: &PolarGrid, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(StefanError::NonConvergence(format!("time step must be positive, got {dt}")));
        }
        Ok(HeatStepper { dt, system: ModalSystem::new(grid, 1.0, -dt)? })
    }

    /// One IMEX step of the pulled-back heat equation on a frozen map.
    pub fn step(&self, grid: &PolarGrid, field: &PhaseField, map: &AleMapData, step_index: usize) -> Result<PhaseField> {
        check_shapes(grid, &field.q, map)?;
        if field.q.iter().all(|&v| v == 0.0) {
            // the scheme is linear in q
            return Ok(PhaseField { t: field.t + self.dt, ..PhaseField::zero(grid) });
        }
        let corr = ale_correction(grid, &field.q, map);
        let rhs = &field.q + &(corr * self.dt);
        let slope = match grid.phase {
            Phase::Plus => Some(outer_slope(grid, &field.q, &neumann_coefficient(grid, map))),
            Phase::Minus => None,
        };
        let q = self.system.solve(grid, &rhs, slope.as_deref());
        let q = apply_boundary_conditions(grid, &q, map);
        if q.iter().any(|v| !v.is_finite()) {
            return Err(StefanError::Divergence { step: step_index });
        }
        PhaseField::new(grid, q, map, field.t + self.dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map_gives_zero_correction() {
        let g = PolarGrid::disc(1.0, 12, 32);
        let m = AleMapData::identity(&g);
        let q = Array2::from_shape_fn(g.shape(), |(i, j)| (g.r[i] * 3.0).sin() * (g.theta(j)).cos());
        assert!(ale_correction(&g, &q, &m).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = PolarGrid::annulus(1.0, 2.0, 12, 32);
        let m = AleMapData::identity(&g);
        let st = HeatStepper::new(&g, 1e-3).unwrap();
        let f = PhaseField::zero(&g);
        let f2 = st.step(&g, &f, &m, 0).unwrap();
        assert!(f2.q.iter().all(|&v| v == 0.0));
    }
}
