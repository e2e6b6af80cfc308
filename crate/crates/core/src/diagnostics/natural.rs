//! Weighted natural energy `E_κ` and dissipation `D_κ`, restricted to the
//! derivative orders the grids support (`a + 2b ≤ order_cap`).

use ndarray::Array2;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{moving_normal, ReferenceGeometry};
use crate::grid::{Phase, PolarGrid};

use super::norms::cartesian_derivatives;
use super::{DiagContext, PhaseDerivatives};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Energy,
    Dissipation,
}

#[derive(Clone, Debug, Serialize)]
pub struct NaturalTerm {
    pub phase: Phase,
    pub functional: Functional,
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct NaturalEnergy {
    pub order_cap: usize,
    pub e_minus: f64,
    pub e_plus: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub terms: Vec<NaturalTerm>,
    /// Families left out, with the reason.
    pub omitted: Vec<String>,
}

impl NaturalEnergy {
    pub fn energy(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.e_minus,
            Phase::Plus => self.e_plus,
        }
    }

    pub fn dissipation(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.d_minus,
            Phase::Plus => self.d_plus,
        }
    }
}

fn smoothstep5(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Cut-off equal to 1 within `ν` of Γ∪∂Ω and 0 beyond `2ν`.
pub fn cutoff(grid: &PolarGrid, nu: f64) -> Array2<f64> {
    let mut out = grid.zeros();
    for i in 0..grid.n_r() {
        let d = grid.boundary_distance(i);
        let m = 1.0 - smoothstep5((d - nu) / nu);
        out.row_mut(i).fill(m);
    }
    out
}

/// `∂̄^a f = R_Γ^{-a} ∂_θ^a f` in the interior.
pub fn tangential_power(grid: &PolarGrid, f: &Array2<f64>, a: usize) -> Array2<f64> {
    if a == 0 {
        return f.clone();
    }
    grid.ang.derivative_rows(f, a as u32) / grid.r_gamma.powi(a as i32)
}

/// Pairs `(a, b)` with `a + 2b ≤ cap`, ordered by `b` then `a`.
pub fn index_pairs(cap: i64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if cap < 0 {
        return out;
    }
    for b in 0..=(cap / 2) as usize {
        for a in 0..=(cap as usize - 2 * b) {
            out.push((a, b));
        }
    }
    out
}

/// Tangential derivative `∂̄^a` of the map, `∂̄^a Ψ` for `b = 0` and `∂̄^a ∂_t^b Ψ` otherwise.
fn map_tangential(grid: &PolarGrid, d: &PhaseDerivatives, a: usize, b: usize) -> Option<[Array2<f64>; 2]> {
    let src = if b == 0 { &d.disp } else { d.w.get(b - 1)?.as_ref()? };
    let mut out = [tangential_power(grid, &src[0], a), tangential_power(grid, &src[1], a)];
    if b == 0 {
        // ∂_θ^a (r cos θ, r sin θ) = r (cos(θ + aπ/2), sin(θ + aπ/2))
        let scale = grid.r_gamma.powi(a as i32);
        let shift = a as f64 * std::f64::consts::FRAC_PI_2;
        for ((i, j), v) in out[0].indexed_iter_mut() {
            *v += grid.r[i] * (grid.theta(j) + shift).cos() / scale;
        }
        for ((i, j), v) in out[1].indexed_iter_mut() {
            *v += grid.r[i] * (grid.theta(j) + shift).sin() / scale;
        }
    }
    Some(out)
}

/// Cartesian derivative `∂^α ∂_t^b Ψ` for every `|α| ≤ order`, same order as
/// [`cartesian_derivatives`].
fn map_cartesian(grid: &PolarGrid, d: &PhaseDerivatives, order: usize, b: usize) -> Option<Vec<[Array2<f64>; 2]>> {
    let src = if b == 0 { &d.disp } else { d.w.get(b - 1)?.as_ref()? };
    let c0 = cartesian_derivatives(grid, &src[0], order);
    let c1 = cartesian_derivatives(grid, &src[1], order);
    let (cs, sn) = grid.trig();
    Some(
        c0.into_iter()
            .zip(c1)
            .map(|((a1, a2, f0), (_, _, f1))| {
                let (mut f0, mut f1) = (f0, f1);
                if b == 0 {
                    match (a1, a2) {
                        (0, 0) => {
                            for ((i, j), v) in f0.indexed_iter_mut() {
                                *v += grid.r[i] * cs[j];
                            }
                            for ((i, j), v) in f1.indexed_iter_mut() {
                                *v += grid.r[i] * sn[j];
                            }
                        }
                        (1, 0) => f0 += 1.0,
                        (0, 1) => f1 += 1.0,
                        _ => {}
                    }
                }
                [f0, f1]
            })
            .collect(),
    )
}

fn dot(a: &[Array2<f64>; 2], b: &[Array2<f64>; 2]) -> Array2<f64> {
    &a[0] * &b[0] + &a[1] * &b[1]
}

fn sq_norm(v: &[Array2<f64>; 2]) -> Array2<f64> {
    dot(v, v)
}

/// `∫_Γ f² ds` for samples on Γ.
fn gamma_l2_sq(geom: &ReferenceGeometry, f: &[f64]) -> f64 {
    let dth = 2.0 * std::f64::consts::PI / geom.n_theta() as f64;
    f.iter().zip(&geom.speed).map(|(x, s)| x * x * s).sum::<f64>() * dth
}

struct PhaseAccumulator<'a> {
    phase: Phase,
    terms: &'a mut Vec<NaturalTerm>,
    omitted: &'a mut Vec<String>,
}

impl PhaseAccumulator<'_> {
    fn push(&mut self, functional: Functional, label: String, value: f64) {
        self.terms.push(NaturalTerm { phase: self.phase, functional, label, value });
    }

    fn omit(&mut self, what: String) {
        let msg = format!("{}: {what}", self.phase);
        if !self.omitted.contains(&msg) {
            self.omitted.push(msg);
        }
    }
}

/// Computes all capped terms for both phases. `weights` are `None` when the
/// Rayleigh-Taylor condition fails; the weighted terms are then omitted.
pub fn compute_natural_energy(ctx: &DiagContext<'_>, derivs: [&PhaseDerivatives; 2]) -> Result<NaturalEnergy> {
    let cap = ctx.settings.order_cap as i64;
    let mut out = NaturalEnergy { order_cap: ctx.settings.order_cap, ..Default::default() };
    let t = ctx.h.t;
    let c = ctx.constants;
    let gamma_factor = ((-c.lambda1 + c.eta) * t).exp();
    let kappa = ctx.kappa();
    let hk = ctx.regularized_height();
    let mn = moving_normal(ctx.geom, &hk)?;
    let mut terms = Vec::new();
    let mut omitted = Vec::new();
    for p in 0..2 {
        let grid = ctx.grids[p];
        let map = ctx.maps[p];
        let d = derivs[p];
        let mut acc = PhaseAccumulator { phase: grid.phase, terms: &mut terms, omitted: &mut omitted };
        let mu = cutoff(grid, ctx.settings.nu);
        let one_minus_mu = mu.mapv(|m| 1.0 - m);
        let weight = ctx.weights.map(|w| w.get(grid.phase));
        let mu_w = weight.map(|w| &mu * w);
        let gi = grid.gamma_row();
        let jac_gamma: Vec<f64> = map.jac.row(gi).to_vec();
        let a_coef: Vec<f64> = jac_gamma.iter().zip(&mn.one_plus_hh).map(|(j, o)| o / j).collect();
        let dn = d.normal_derivative(grid, ctx.geom);
        let r_coef: Option<Vec<f64>> = if dn.iter().all(|&x| x > 0.0) {
            Some((0..grid.n_theta()).map(|j| mn.g[j] / (dn[j] * jac_gamma[j] * jac_gamma[j])).collect())
        } else {
            None
        };

        for functional in [Functional::Energy, Functional::Dissipation] {
            let (v_cap, q_cap, q_shift) = match functional {
                Functional::Energy => (cap - 1, cap, 0),
                Functional::Dissipation => (cap, cap - 1, 1),
            };
            // velocity family
            for (a, b) in index_pairs(v_cap) {
                let Some(vb) = d.v.get(b) else {
                    acc.omit(format!("∂_t^{b} v unavailable"));
                    continue;
                };
                let field = [tangential_power(grid, &vb[0], a), tangential_power(grid, &vb[1], a)];
                match &mu_w {
                    Some(mw) => {
                        let val = grid.integrate_product(&sq_norm(&field), mw);
                        acc.push(functional, format!("weighted v a={a} b={b}"), val);
                    }
                    None => acc.omit("weighted terms (Rayleigh-Taylor condition fails)".into()),
                }
                if kappa > 0.0 {
                    match &r_coef {
                        Some(rc) => {
                            let vn: Vec<f64> = (0..grid.n_theta())
                                .map(|j| {
                                    let n = mn.n[j];
                                    rc[j].sqrt() * (field[0][[gi, j]] * n[0] + field[1][[gi, j]] * n[1])
                                })
                                .collect();
                            let val = kappa * kappa * gamma_factor * gamma_l2_sq(ctx.geom, &vn);
                            acc.push(functional, format!("boundary v a={a} b={b}"), val);
                        }
                        None => acc.omit("boundary velocity terms (normal derivative not positive)".into()),
                    }
                }
            }
            for (a, b) in index_pairs(v_cap) {
                if a != 0 {
                    continue;
                }
                let Some(vb) = d.v.get(b) else { continue };
                let order = (v_cap - 2 * b as i64) as usize;
                let c0 = cartesian_derivatives(grid, &vb[0], order);
                let c1 = cartesian_derivatives(grid, &vb[1], order);
                for ((a1, a2, f0), (_, _, f1)) in c0.into_iter().zip(c1) {
                    let val = grid.integrate_product(&sq_norm(&[f0, f1]), &one_minus_mu);
                    acc.push(functional, format!("unweighted v d=({a1},{a2}) b={b}"), val);
                }
            }
            // temperature family
            for (a, b) in index_pairs(q_cap) {
                let bt = b + q_shift;
                let Some(qb) = d.q.get(bt) else {
                    acc.omit(format!("∂_t^{bt} q unavailable"));
                    continue;
                };
                let mut field = tangential_power(grid, qb, a);
                if a + bt >= 1 {
                    match map_tangential(grid, d, a, bt) {
                        Some(psi) => field += &dot(&psi, &d.v[0]),
                        None => acc.omit(format!("∂_t^{bt} Ψ·v (height derivative {bt} unavailable)")),
                    }
                }
                match &mu_w {
                    Some(mw) => {
                        let val = grid.integrate_product(&(&field * &field), mw);
                        acc.push(functional, format!("weighted q a={a} b={bt}"), val);
                    }
                    None => acc.omit("weighted terms (Rayleigh-Taylor condition fails)".into()),
                }
                match ctx.height_derivative_samples(bt) {
                    Some(hs) => {
                        let lam = ctx.mollify_once(&hs);
                        let mut dh = lam;
                        for _ in 0..a {
                            dh = ctx.geom.tangential_derivative(&dh);
                        }
                        let weighted: Vec<f64> = dh.iter().zip(&a_coef).map(|(x, c)| x * c).collect();
                        let val = gamma_factor * gamma_l2_sq(ctx.geom, &weighted);
                        acc.push(functional, format!("boundary h a={a} b={bt}"), val);
                    }
                    None => acc.omit(format!("∂_t^{bt} h unavailable")),
                }
            }
            for (a, b) in index_pairs(q_cap) {
                if a != 0 {
                    continue;
                }
                let bt = b + q_shift;
                let Some(qb) = d.q.get(bt) else { continue };
                let order = (q_cap - 2 * b as i64) as usize;
                let cq = cartesian_derivatives(grid, qb, order);
                let cpsi = map_cartesian(grid, d, order, bt);
                for (idx, (a1, a2, f)) in cq.into_iter().enumerate() {
                    let mut field = f;
                    if a1 + a2 + bt >= 1 {
                        if let Some(ps) = &cpsi {
                            field += &dot(&ps[idx], &d.v[0]);
                        }
                    }
                    let val = grid.integrate_product(&(&field * &field), &one_minus_mu);
                    acc.push(functional, format!("unweighted q d=({a1},{a2}) b={bt}"), val);
                }
            }
        }
    }
    for term in &terms {
        let scale = if term.functional == Functional::Energy { 0.5 } else { 1.0 };
        let slot = match (term.phase, term.functional) {
            (Phase::Minus, Functional::Energy) => &mut out.e_minus,
            (Phase::Plus, Functional::Energy) => &mut out.e_plus,
            (Phase::Minus, Functional::Dissipation) => &mut out.d_minus,
            (Phase::Plus, Functional::Dissipation) => &mut out.d_plus,
        };
        *slot += scale * term.value;
    }
    out.terms = terms;
    out.omitted = omitted;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_respect_cap() {
        assert_eq!(index_pairs(2), vec![(0, 0), (1, 0), (2, 0), (0, 1)]);
        assert_eq!(index_pairs(1), vec![(0, 0), (1, 0)]);
        assert!(index_pairs(-1).is_empty());
    }

    #[test]
    fn cutoff_profile() {
        let g = PolarGrid::disc(1.0, 32, 32);
        let mu = cutoff(&g, 0.1);
        assert_eq!(mu[[g.gamma_row(), 0]], 1.0);
        assert_eq!(mu[[0, 0]], 0.0);
        assert!(mu.iter().all(|&m| (0.0..=1.0).contains(&m)));
    }
}
