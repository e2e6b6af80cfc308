//! Diagnostics evaluated on immutable snapshots of the state: Sobolev norms,
//! the components of `S(t)`, weights, the natural energy and the bootstrap
//! monitors.

pub mod bootstrap;
pub mod natural;
pub mod norms;
pub mod weights;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ale::{extend_normal_field, regularized_samples, AleMapData};
use crate::error::{Result, StefanError};
use crate::geometry::{HeightState, ReferenceGeometry};
use crate::grid::{Phase, PolarGrid};
use crate::heat::{compute_gradient_v, heat_rhs, PhaseField};
use crate::mollifier::Mollifier;
use crate::spectral::SpectralConstants;

pub use bootstrap::{fit_decay_rate, monitor_bootstrap, BootstrapFlags, BootstrapMonitor, BootstrapSummary, EnvelopeParams};
pub use natural::{compute_natural_energy, cutoff, NaturalEnergy, NaturalTerm};
pub use norms::{boundary_sobolev_norm, height_sobolev_norm, interior_sobolev_norm};
pub use weights::{solve_weights, WeightField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagSettings {
    /// Cut-off plateau width.
    pub nu: f64,
    /// Cap on `a + 2b` in the natural energy.
    pub order_cap: usize,
    pub emit_weights: bool,
    /// Include `∂_t³` quantities (noisy backward differences).
    pub third_derivatives: bool,
    pub envelope: EnvelopeParams,
}

impl Default for DiagSettings {
    fn default() -> Self {
        DiagSettings { nu: 0.1, order_cap: 2, emit_weights: false, third_derivatives: false, envelope: EnvelopeParams::default() }
    }
}

/// Everything the diagnostics read at one instant.
pub struct DiagContext<'a> {
    pub geom: &'a ReferenceGeometry,
    pub grids: [&'a PolarGrid; 2],
    pub fields: [&'a PhaseField; 2],
    pub maps: [&'a AleMapData; 2],
    pub h: &'a HeightState,
    /// Initial height coefficients.
    pub h0: &'a [Complex64],
    pub moll: Option<&'a Mollifier>,
    pub constants: &'a SpectralConstants,
    pub settings: &'a DiagSettings,
    pub weights: Option<&'a WeightField>,
}

impl DiagContext<'_> {
    pub fn kappa(&self) -> f64 {
        self.maps[0].kappa
    }

    /// `h^κ = Λ_κΛ_κ h` on Γ.
    pub fn regularized_height(&self) -> Vec<f64> {
        regularized_samples(self.geom, &self.h.coeffs, self.moll)
    }

    pub fn mollify_once(&self, f: &[f64]) -> Vec<f64> {
        match self.moll {
            Some(m) => m.mollify(&self.geom.ang, f),
            None => f.to_vec(),
        }
    }

    fn height_derivative(&self, b: usize) -> Option<&[Complex64]> {
        match b {
            0 => Some(&self.h.coeffs),
            1 => Some(&self.h.d1),
            2 => self.h.d2.as_deref(),
            3 if self.settings.third_derivatives => self.h.d3.as_deref(),
            _ => None,
        }
    }

    /// Samples of `∂_t^b h` when the history is available.
    pub fn height_derivative_samples(&self, b: usize) -> Option<Vec<f64>> {
        self.height_derivative(b).map(|c| HeightState::samples_of(c, &self.geom.ang))
    }
}

/// Time derivatives of one phase at a snapshot. `q_t = Δ_Ψ q − v·w` is read
/// off the equation; higher ones apply the same operator on the frozen map.
#[derive(Clone, Debug)]
pub struct PhaseDerivatives {
    pub q: Vec<Array2<f64>>,
    pub v: Vec<[Array2<f64>; 2]>,
    /// `Ψ − e`.
    pub disp: [Array2<f64>; 2],
    /// `∂_t^{b+1} Ψ`; `None` when the height history lacks that order.
    pub w: Vec<Option<[Array2<f64>; 2]>>,
}

impl PhaseDerivatives {
    pub fn compute(ctx: &DiagContext<'_>, p: usize, b_max: usize) -> Result<Self> {
        let grid = ctx.grids[p];
        let map = ctx.maps[p];
        let field = ctx.fields[p];
        let mut q = vec![field.q.clone()];
        let mut v = vec![field.v.clone()];
        for _ in 0..b_max {
            let next = heat_rhs(grid, q.last().expect("nonempty"), map);
            v.push(compute_gradient_v(grid, &next, map)?);
            q.push(next);
        }
        let mut w = vec![Some(map.w.clone())];
        for b in 2..=b_max.max(2) {
            let wb = match ctx.height_derivative(b) {
                Some(c) => {
                    let s = regularized_samples(ctx.geom, c, ctx.moll);
                    let [a, bb] = extend_normal_field(ctx.geom, grid, &s)?;
                    Some([a.value, bb.value])
                }
                None => None,
            };
            w.push(wb);
        }
        Ok(PhaseDerivatives { q, v, disp: map.disp.clone(), w })
    }

    /// `∂_N q = −v·N` along Γ.
    pub fn normal_derivative(&self, grid: &PolarGrid, geom: &ReferenceGeometry) -> Vec<f64> {
        normal_derivative_from_v(grid, geom, &self.v[0])
    }
}

pub fn normal_derivative_from_v(grid: &PolarGrid, geom: &ReferenceGeometry, v: &[Array2<f64>; 2]) -> Vec<f64> {
    let gi = grid.gamma_row();
    (0..grid.n_theta())
        .map(|j| -(v[0][[gi, j]] * geom.normal[j][0] + v[1][[gi, j]] * geom.normal[j][1]))
        .collect()
}

/// Instantaneous components of `S(t)`; NaN marks a component whose time
/// history is not available yet.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SComponents {
    pub e_minus: f64,
    pub e_plus: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub e_gamma: f64,
    pub d_gamma: f64,
    pub e_beta_minus: f64,
    pub e_beta_plus: f64,
    pub h_t_2p5: f64,
    pub h_dev_2p5: f64,
    pub omitted: Vec<String>,
}

impl SComponents {
    pub fn e_beta(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.e_beta_minus,
            Phase::Plus => self.e_beta_plus,
        }
    }

    pub fn interior_energy(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.e_minus,
            Phase::Plus => self.e_plus,
        }
    }

    pub fn interior_dissipation(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Minus => self.d_minus,
            Phase::Plus => self.d_plus,
        }
    }
}

fn tangential_sq(grid: &PolarGrid, v: &[Array2<f64>; 2], a: usize) -> f64 {
    let f0 = natural::tangential_power(grid, &v[0], a);
    let f1 = natural::tangential_power(grid, &v[1], a);
    grid.integrate_product(&f0, &f0) + grid.integrate_product(&f1, &f1)
}

/// Truncated `ℰ±, 𝒟±, ℰ^Γ, 𝒟^Γ, E_β±` at the context's time.
pub fn compute_norm_s(ctx: &DiagContext<'_>, derivs: [&PhaseDerivatives; 2]) -> Result<SComponents> {
    let t = ctx.h.t;
    let c = ctx.constants;
    let l_max = if ctx.settings.third_derivatives { 3 } else { 2 };
    let mut s = SComponents::default();
    if !ctx.settings.third_derivatives {
        s.omitted.push("third time derivatives of q and h".into());
    }
    for p in 0..2 {
        let grid = ctx.grids[p];
        let d = derivs[p];
        let (mut e, mut dd) = (0.0, 0.0);
        for l in 0..=l_max {
            let (Some(q), Some(v)) = (d.q.get(l), d.v.get(l)) else {
                return Err(StefanError::Shape(format!("missing time derivative {l}")));
            };
            let order = 6.0 - 2.0 * l as f64;
            e += norms::interior_sobolev_sq(grid, q, order, true)?;
            dd += norms::interior_sobolev_sq(grid, q, order + 0.5, true)?;
            if l < 3 {
                e += tangential_sq(grid, v, 5 - 2 * l);
            }
            dd += tangential_sq(grid, v, 6 - 2 * l);
        }
        let mut eb = 0.0;
        for l in 0..=2 {
            eb += norms::interior_sobolev_sq(grid, &d.q[l], 4.0 - 2.0 * l as f64, true)?;
        }
        eb *= (c.beta(grid.phase) * t).exp();
        match grid.phase {
            Phase::Minus => {
                s.e_minus = e;
                s.d_minus = dd;
                s.e_beta_minus = eb;
            }
            Phase::Plus => {
                s.e_plus = e;
                s.d_plus = dd;
                s.e_beta_plus = eb;
            }
        }
    }
    let ang = &ctx.geom.ang;
    let factor = ((-c.lambda1 + c.eta) * t).exp();
    let mut eg = 0.0;
    for l in 0..=l_max {
        match ctx.height_derivative(l) {
            Some(h) => eg += height_sobolev_norm(ang, h, 6.0 - 2.0 * l as f64).powi(2),
            None => eg = f64::NAN,
        }
    }
    s.e_gamma = factor * eg;
    let mut dg = 0.0;
    for l in 0..l_max {
        match ctx.height_derivative(l + 1) {
            Some(h) => dg += height_sobolev_norm(ang, h, 5.0 - 2.0 * l as f64).powi(2),
            None => dg = f64::NAN,
        }
    }
    s.d_gamma = factor * dg;
    s.h_t_2p5 = height_sobolev_norm(ang, &ctx.h.d1, 2.5);
    let dev: Vec<Complex64> = ctx.h.coeffs.iter().zip(ctx.h0).map(|(a, b)| a - b).collect();
    s.h_dev_2p5 = height_sobolev_norm(ang, &dev, 2.5);
    Ok(s)
}

/// Running suprema and time integrals over the report series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SRunning {
    pub sup_e_minus: f64,
    pub sup_e_plus: f64,
    pub sup_e_gamma: f64,
    pub int_d_minus: f64,
    pub int_d_plus: f64,
    pub int_d_gamma: f64,
    pub sup_h_dev_2p5: f64,
    /// `sup ℰ⁺ + sup ℰ⁻ + sup ℰ^Γ + ∫(𝒟⁺ + 𝒟⁻ + 𝒟^Γ) + E_β⁺ + E_β⁻`.
    pub s_total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub step_index: usize,
    pub x_minus: f64,
    pub x_plus: f64,
    pub s: SComponents,
    pub running: SRunning,
    pub natural: NaturalEnergy,
    /// `(min W⁻, max W⁻, min W⁺, max W⁺)`, NaN when the weights are undefined.
    pub weight_extrema: [f64; 4],
    pub flags: BootstrapFlags,
    pub warnings: Vec<String>,
}

/// Diagnostics at one instant; bootstrap flags and running fields are left
/// for [`BootstrapMonitor`].
pub fn compute_report(ctx: &DiagContext<'_>, step_index: usize) -> Result<(EnergyReport, Option<WeightField>)> {
    let cap = ctx.settings.order_cap;
    let b_max = ((cap + 1) / 2).max(if ctx.settings.third_derivatives { 3 } else { 2 });
    let dm = PhaseDerivatives::compute(ctx, 0, b_max)?;
    let dp = PhaseDerivatives::compute(ctx, 1, b_max)?;
    let dn_m = dm.normal_derivative(ctx.grids[0], ctx.geom);
    let dn_p = dp.normal_derivative(ctx.grids[1], ctx.geom);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    let weights = match solve_weights(ctx.grids, [&dn_m, &dn_p], ctx.h.t, ctx.constants) {
        Ok(w) => Some(w),
        Err(e @ (StefanError::WeightUndefined { .. } | StefanError::DegenerateData(_))) => {
            warnings.push(format!("weights undefined: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let with_w = DiagContext { weights: weights.as_ref(), ..*ctx };
    let natural = compute_natural_energy(&with_w, [&dm, &dp])?;
    let s = compute_norm_s(&with_w, [&dm, &dp])?;
    let weight_extrema = weights.as_ref().map(|w| w.extrema()).unwrap_or([f64::NAN; 4]);
    let report = EnergyReport {
        t: ctx.h.t,
        step_index,
        x_minus: min(&dn_m),
        x_plus: min(&dn_p),
        s,
        running: SRunning::default(),
        natural,
        weight_extrema,
        flags: BootstrapFlags::default(),
        warnings,
    };
    Ok((report, weights))
}
