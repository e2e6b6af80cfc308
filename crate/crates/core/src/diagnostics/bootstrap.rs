//! Runtime monitors for the bootstrap inequalities, plus fitted envelope
//! constants over a report series.

use serde::{Deserialize, Serialize};

use crate::grid::Phase;
use crate::spectral::SpectralConstants;

use super::{EnergyReport, SRunning};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvelopeParams {
    /// Smallness `ε` of the energy.
    pub eps: f64,
    /// `C̃` in `E_β(t) ≤ C̃ E_β(0)`.
    pub ctilde: f64,
    /// `C` in the lower envelope of `X±`.
    pub clower: f64,
    /// `C` in the decay envelope of `h_t`.
    pub cdecay: f64,
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        EnvelopeParams { eps: 0.1, ctilde: 1.5, clower: 0.1, cdecay: 10.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapFlags {
    pub energy_minus: bool,
    pub energy_plus: bool,
    pub lower_norm_minus: bool,
    pub lower_norm_plus: bool,
    pub lower_bound_minus: bool,
    pub lower_bound_plus: bool,
    pub h_t_decay: bool,
}

impl BootstrapFlags {
    pub fn all(&self) -> bool {
        self.energy_minus
            && self.energy_plus
            && self.lower_norm_minus
            && self.lower_norm_plus
            && self.lower_bound_minus
            && self.lower_bound_plus
            && self.h_t_decay
    }

    pub const NAMES: [&'static str; 7] = [
        "flag_energy_minus",
        "flag_energy_plus",
        "flag_lower_norm_minus",
        "flag_lower_norm_plus",
        "flag_lower_bound_minus",
        "flag_lower_bound_plus",
        "flag_h_t_decay",
    ];

    pub fn values(&self) -> [bool; 7] {
        [
            self.energy_minus,
            self.energy_plus,
            self.lower_norm_minus,
            self.lower_norm_plus,
            self.lower_bound_minus,
            self.lower_bound_plus,
            self.h_t_decay,
        ]
    }

    pub fn from_values(v: [bool; 7]) -> Self {
        BootstrapFlags {
            energy_minus: v[0],
            energy_plus: v[1],
            lower_norm_minus: v[2],
            lower_norm_plus: v[3],
            lower_bound_minus: v[4],
            lower_bound_plus: v[5],
            h_t_decay: v[6],
        }
    }
}

fn finite_or_zero(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

/// `|c₁|`, with undefined projections counted as zero.
fn abs_c1(c: &SpectralConstants, phase: Phase) -> f64 {
    finite_or_zero(c.c1(phase).abs())
}

/// Incremental monitor: feed reports in time order.
#[derive(Clone, Debug)]
pub struct BootstrapMonitor {
    params: EnvelopeParams,
    constants: SpectralConstants,
    e_beta0: Option<[f64; 2]>,
    last: Option<(f64, [f64; 3])>,
    running: SRunning,
}

impl BootstrapMonitor {
    pub fn new(params: EnvelopeParams, constants: SpectralConstants) -> Self {
        BootstrapMonitor { params, constants, e_beta0: None, last: None, running: SRunning::default() }
    }

    pub fn observe(&mut self, r: &mut EnergyReport) {
        let s = &r.s;
        let e0 = *self.e_beta0.get_or_insert([s.e_beta_minus, s.e_beta_plus]);
        let d_now = [finite_or_zero(s.d_minus), finite_or_zero(s.d_plus), finite_or_zero(s.d_gamma)];
        if let Some((t_prev, d_prev)) = self.last {
            let dt = r.t - t_prev;
            self.running.int_d_minus += 0.5 * dt * (d_prev[0] + d_now[0]);
            self.running.int_d_plus += 0.5 * dt * (d_prev[1] + d_now[1]);
            self.running.int_d_gamma += 0.5 * dt * (d_prev[2] + d_now[2]);
        }
        self.last = Some((r.t, d_now));
        let run = &mut self.running;
        run.sup_e_minus = run.sup_e_minus.max(finite_or_zero(s.e_minus));
        run.sup_e_plus = run.sup_e_plus.max(finite_or_zero(s.e_plus));
        run.sup_e_gamma = run.sup_e_gamma.max(finite_or_zero(s.e_gamma));
        run.sup_h_dev_2p5 = run.sup_h_dev_2p5.max(finite_or_zero(s.h_dev_2p5));
        run.s_total = run.sup_e_minus
            + run.sup_e_plus
            + run.sup_e_gamma
            + run.int_d_minus
            + run.int_d_plus
            + run.int_d_gamma
            + finite_or_zero(s.e_beta_minus)
            + finite_or_zero(s.e_beta_plus);

        let p = &self.params;
        let c = &self.constants;
        let eps2 = p.eps * p.eps;
        let gamma_part = run.sup_e_gamma + run.int_d_gamma;
        let energy = |phase: Phase, sup_e: f64, int_d: f64| sup_e + int_d + abs_c1(c, phase) * gamma_part <= eps2;
        let lower_bound = |phase: Phase, x: f64| {
            x >= p.clower * abs_c1(c, phase) * (-(c.lambda(phase) + 0.5 * c.eta) * r.t).exp()
        };
        r.flags = BootstrapFlags {
            energy_minus: energy(Phase::Minus, run.sup_e_minus, run.int_d_minus),
            energy_plus: energy(Phase::Plus, run.sup_e_plus, run.int_d_plus),
            lower_norm_minus: s.e_beta_minus <= p.ctilde * e0[0],
            lower_norm_plus: s.e_beta_plus <= p.ctilde * e0[1],
            lower_bound_minus: lower_bound(Phase::Minus, r.x_minus),
            lower_bound_plus: lower_bound(Phase::Plus, r.x_plus),
            h_t_decay: s.h_t_2p5 <= p.cdecay * p.eps * (-0.5 * c.lambda1 * r.t).exp(),
        };
        r.running = run.clone();
    }
}

/// Least-squares decay rate `μ` of `x ≈ C e^{−μt}` over `t ∈ [t_min, t_max]`.
pub fn fit_decay_rate(ts: &[f64], xs: &[f64], t_min: f64, t_max: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(xs)
        .filter(|(t, x)| **t >= t_min && **t <= t_max && **x > 0.0 && x.is_finite())
        .map(|(t, x)| (*t, x.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BootstrapSummary {
    pub flags: Vec<BootstrapFlags>,
    /// First report time at which each flag failed, in [`BootstrapFlags::NAMES`] order.
    pub first_violation: [Option<f64>; 7],
    pub max_e_beta_ratio: [f64; 2],
    /// Fitted decay exponents of `X±` over the second half of the series.
    pub x_decay_rate: [Option<f64>; 2],
    /// Largest `C` with `X± ≥ C|c₁±| e^{−(λ₁±+η/2)t}`.
    pub x_lower_constant: [f64; 2],
    /// Smallest `C` with `|h_t|_{2.5} ≤ C ε e^{−λ₁t/2}`.
    pub h_t_constant: f64,
    /// Largest `C` with `C e^{σt}/(K²|c₁|) ≤ min W`.
    pub weight_lower_constant: [f64; 2],
    /// Smallest `C` with `max W ≤ C e^{(σ+η)t}/|c₁|`.
    pub weight_upper_constant: [f64; 2],
    /// Overall extrema of the weights (short-time envelope).
    pub weight_range: [f64; 2],
}

/// Replays the monitor over a series (flags recomputed) and fits constants.
pub fn monitor_bootstrap(series: &mut [EnergyReport], constants: &SpectralConstants, params: &EnvelopeParams) -> BootstrapSummary {
    let mut mon = BootstrapMonitor::new(params.clone(), constants.clone());
    let mut out = BootstrapSummary {
        x_lower_constant: [f64::INFINITY; 2],
        weight_lower_constant: [f64::INFINITY; 2],
        weight_range: [f64::INFINITY, f64::NEG_INFINITY],
        ..Default::default()
    };
    for r in series.iter_mut() {
        mon.observe(r);
        out.flags.push(r.flags);
        for (k, ok) in r.flags.values().iter().enumerate() {
            if !ok && out.first_violation[k].is_none() {
                out.first_violation[k] = Some(r.t);
            }
        }
    }
    let Some(first) = series.first() else {
        return out;
    };
    let t_end = series.last().map(|r| r.t).unwrap_or(0.0);
    let ts: Vec<f64> = series.iter().map(|r| r.t).collect();
    for (p, phase) in [Phase::Minus, Phase::Plus].into_iter().enumerate() {
        let e0 = first.s.e_beta(phase);
        out.max_e_beta_ratio[p] = series
            .iter()
            .map(|r| if e0 > 0.0 { r.s.e_beta(phase) / e0 } else { 0.0 })
            .fold(0.0, f64::max);
        let xs: Vec<f64> = series.iter().map(|r| if p == 0 { r.x_minus } else { r.x_plus }).collect();
        out.x_decay_rate[p] = fit_decay_rate(&ts, &xs, 0.5 * t_end, t_end);
        let c1 = abs_c1(constants, phase);
        let lam = constants.lambda(phase);
        let sigma = constants.sigma(phase);
        let k = constants.k_norm(phase);
        for (r, x) in series.iter().zip(&xs) {
            if c1 > 0.0 {
                let v = x * ((lam + 0.5 * constants.eta) * r.t).exp() / c1;
                out.x_lower_constant[p] = out.x_lower_constant[p].min(v);
            }
            let (wmin, wmax) = (r.weight_extrema[2 * p], r.weight_extrema[2 * p + 1]);
            if wmin.is_finite() && c1 > 0.0 {
                let lo = wmin * k * k * c1 * (-sigma * r.t).exp();
                let hi = wmax * c1 * (-(sigma + constants.eta) * r.t).exp();
                out.weight_lower_constant[p] = out.weight_lower_constant[p].min(lo);
                out.weight_upper_constant[p] = out.weight_upper_constant[p].max(hi);
                out.weight_range[0] = out.weight_range[0].min(wmin);
                out.weight_range[1] = out.weight_range[1].max(wmax);
            }
        }
    }
    if params.eps > 0.0 {
        out.h_t_constant = series
            .iter()
            .map(|r| r.s.h_t_2p5 * (0.5 * constants.lambda1 * r.t).exp() / params.eps)
            .fold(0.0, f64::max);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exponent() {
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let xs: Vec<f64> = ts.iter().map(|t| 3.0 * (-1.7 * t).exp()).collect();
        let rate = fit_decay_rate(&ts, &xs, 0.0, 10.0).unwrap();
        assert!((rate - 1.7).abs() < 1e-12);
    }
}
