//! The coupled time loop: maps for the current interface, heat steps on both
//! phases, the jump-law interface update, then diagnostics and output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::ale::{compute_map_data, extend_normal_field, regularized_samples, AleMapData, VelocityMode};
use crate::config::{CflPolicy, Q0Preset, SimConfig};
use crate::diagnostics::{
    compute_report, monitor_bootstrap, BootstrapSummary, DiagContext, DiagSettings, EnergyReport, WeightField,
};
use crate::error::{Result, StefanError};
use crate::geometry::{check_height, HeightState, ReferenceGeometry};
use crate::grid::PolarGrid;
use crate::harmonic::HarmonicField;
use crate::heat::{advective_cfl_bound, HeatStepper, PhaseField};
use crate::interface::{gamma_trace, interface_velocity, step_interface, validate_height};
use crate::io::{coeffs_to_triples, emit_timeseries, triples_to_coeffs, PhaseSnapshot, Provenance, Snapshot, SCHEMA_VERSION};
use crate::mollifier::Mollifier;
use crate::spectral::{
    check_admissibility, derived_constants, first_eigenpair, AdmissibilityReport, Eigenpair, OuterCondition,
    SpectralConstants,
};

#[derive(Clone, Debug)]
pub struct SimulationState {
    pub h: HeightState,
    pub fields: [PhaseField; 2],
    pub maps: [AleMapData; 2],
    pub t: f64,
    pub step_index: usize,
}

fn zero_coeffs(c: &[Complex64]) -> bool {
    c.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Builds maps from scratch for the given height and height velocity.
fn assemble_maps(
    geom: &ReferenceGeometry,
    grids: &[PolarGrid; 2],
    moll: Option<&Mollifier>,
    coeffs: &[Complex64],
    d1: &[Complex64],
    kappa: f64,
) -> Result<[AleMapData; 2]> {
    let hs = regularized_samples(geom, coeffs, moll);
    let vs = regularized_samples(geom, d1, moll);
    let moving = !zero_coeffs(d1);
    let build = |grid: &PolarGrid| -> Result<AleMapData> {
        let disp = extend_normal_field(geom, grid, &hs)?;
        let w = if moving {
            let [a, b] = extend_normal_field(geom, grid, &vs)?;
            [a.value, b.value]
        } else {
            [grid.zeros(), grid.zeros()]
        };
        compute_map_data(grid, &disp, w, kappa)
    };
    Ok([build(&grids[0])?, build(&grids[1])?])
}

struct DispCache {
    coeffs: Vec<Complex64>,
    disp: [[HarmonicField; 2]; 2],
}

struct MapCache {
    coeffs: Vec<Complex64>,
    d1: Vec<Complex64>,
    maps: [AleMapData; 2],
}

struct VelocityCache {
    d1: Vec<Complex64>,
    w: [[Array2<f64>; 2]; 2],
}

pub struct Simulation {
    pub config: SimConfig,
    pub geom: ReferenceGeometry,
    pub grids: [PolarGrid; 2],
    pub moll: Option<Mollifier>,
    /// Dirichlet ground states of the disc and the annulus.
    pub eigen: [Eigenpair; 2],
    /// Annulus ground state with the Neumann outer wall.
    pub eigen_plus_mixed: Eigenpair,
    pub constants: SpectralConstants,
    pub admissibility: AdmissibilityReport,
    pub h0: Vec<Complex64>,
    pub state: SimulationState,
    pub warnings: Vec<String>,
    steppers: [HeatStepper; 2],
    disp_cache: Option<DispCache>,
    w_cache: Option<VelocityCache>,
    map_cache: Option<MapCache>,
    prev_disp: Option<[[Array2<f64>; 2]; 2]>,
    cfl_warned: bool,
}

/// Initial temperatures for the configured preset.
fn initial_temperatures(
    config: &SimConfig,
    grids: &[PolarGrid; 2],
    phi_minus: &Eigenpair,
    psi_plus: &Eigenpair,
) -> Result<[Array2<f64>; 2]> {
    let init = &config.init;
    let (sm, sp) = (init.scale_minus(), init.scale_plus());
    let r_gamma = config.geometry.r_gamma;
    let q = match init.q0_preset {
        Q0Preset::Zero => [grids[0].zeros(), grids[1].zeros()],
        Q0Preset::Eigen => {
            let unit = |f: &Array2<f64>| f / max_abs(f);
            [unit(&phi_minus.function) * -sm, unit(&psi_plus.function) * sp]
        }
        Q0Preset::RadialAffine => {
            let prof = |g: &PolarGrid, s: f64| Array2::from_shape_fn(g.shape(), |(i, _)| s * (g.r[i] - r_gamma).abs());
            [prof(&grids[0], -sm), prof(&grids[1], sp)]
        }
        Q0Preset::File => {
            let path = init.q0_file.as_ref().ok_or_else(|| {
                crate::config::ConfigError::single("init.q0_preset = \"file\" requires init.q0_file")
            })?;
            let snap = Snapshot::read(path)?;
            let load = |g: &PolarGrid, p: &PhaseSnapshot| -> Result<Array2<f64>> {
                if (p.n_r, p.n_theta) != g.shape() {
                    return Err(StefanError::Shape(format!(
                        "{}: {} phase is {}x{}, grid is {:?}",
                        path.display(),
                        g.phase,
                        p.n_r,
                        p.n_theta,
                        g.shape()
                    )));
                }
                Array2::from_shape_vec(g.shape(), p.q.clone()).map_err(|e| StefanError::Shape(e.to_string()))
            };
            [load(&grids[0], &snap.minus)? * sm, load(&grids[1], &snap.plus)? * sp]
        }
    };
    Ok(q)
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let g = &config.geometry;
        let geom = ReferenceGeometry::build(g.r_gamma, g.r_outer, g.n_theta, &g.perturb, g.curvature_convention)?;
        let grids = [
            PolarGrid::disc(g.r_gamma, config.grid.n_r_minus, g.n_theta),
            PolarGrid::annulus(g.r_gamma, g.r_outer, config.grid.n_r_plus, g.n_theta),
        ];
        let kappa = config.ale.kappa;
        let moll = if kappa > 0.0 { Some(Mollifier::new(kappa)?.with_table(g.n_theta / 2)) } else { None };
        let eigen_minus = first_eigenpair(&grids[0], OuterCondition::Dirichlet)?;
        let eigen_plus = first_eigenpair(&grids[1], OuterCondition::Dirichlet)?;
        let eigen_plus_mixed = first_eigenpair(&grids[1], OuterCondition::Neumann)?;
        let q0 = initial_temperatures(&config, &grids, &eigen_minus, &eigen_plus_mixed)?;

        let mut warnings = Vec::new();
        let eigenvalues = (eigen_minus.value, eigen_plus.value, eigen_plus_mixed.value);
        let eta = config.analysis.eta;
        let constants = match derived_constants(
            [&grids[0], &grids[1]],
            [&q0[0], &q0[1]],
            [&eigen_minus.function, &eigen_plus.function],
            eigenvalues,
            eta,
        ) {
            Ok(c) => c,
            Err(StefanError::DegenerateData(msg)) => {
                warnings.push(format!("{msg}; data-dependent constants are undefined"));
                SpectralConstants::from_eigenvalues(eigenvalues.0, eigenvalues.1, eigenvalues.2, eta)
            }
            Err(e) => return Err(e),
        };
        constants.check_eta()?;

        let mut h = HeightState::from_modes(&config.init.h0, config.grid.k_max);
        let h0 = h.coeffs.clone();
        let h_geom = regularized_samples(&geom, &h.coeffs, moll.as_ref());
        check_height(&geom, &h_geom)?;
        let still = assemble_maps(&geom, &grids, moll.as_ref(), &h.coeffs, &h.d1, kappa)?;
        let admissibility = check_admissibility(
            &geom,
            [&grids[0], &grids[1]],
            [&still[0], &still[1]],
            [&q0[0], &q0[1]],
            &h_geom,
            config.analysis.rt_delta,
        )?;
        if !admissibility.admissible {
            let msg = format!(
                "initial data fail the sign or Rayleigh-Taylor condition (delta = {})",
                config.analysis.rt_delta
            );
            if config.analysis.enforce_admissibility {
                return Err(StefanError::DegenerateData(msg));
            }
            warnings.push(msg);
        }
        if !config.time.freeze_interface {
            h.d1 = HeightState::truncate_samples(&geom.ang, &admissibility.initial_front_speed, config.grid.k_max);
        }
        let steppers = [HeatStepper::new(&grids[0], config.time.dt)?, HeatStepper::new(&grids[1], config.time.dt)?];
        let [q0m, q0p] = q0;
        let placeholder = [AleMapData::identity(&grids[0]), AleMapData::identity(&grids[1])];
        let mut sim = Simulation {
            state: SimulationState {
                fields: [PhaseField::zero(&grids[0]), PhaseField::zero(&grids[1])],
                maps: placeholder,
                h,
                t: 0.0,
                step_index: 0,
            },
            config,
            geom,
            grids,
            moll,
            eigen: [eigen_minus, eigen_plus],
            eigen_plus_mixed,
            constants,
            admissibility,
            h0,
            warnings,
            steppers,
            disp_cache: None,
            w_cache: None,
            map_cache: None,
            prev_disp: None,
            cfl_warned: false,
        };
        let (coeffs, d1) = (sim.state.h.coeffs.clone(), sim.state.h.d1.clone());
        let maps = sim.maps_for(&coeffs, &d1)?;
        sim.state.fields = [
            PhaseField::new(&sim.grids[0], q0m, &maps[0], 0.0)?,
            PhaseField::new(&sim.grids[1], q0p, &maps[1], 0.0)?,
        ];
        sim.state.maps = maps;
        for w in &sim.warnings {
            warn!("{w}");
        }
        Ok(sim)
    }

    fn disp_for(&mut self, coeffs: &[Complex64]) -> Result<&[[HarmonicField; 2]; 2]> {
        let hit = self.disp_cache.as_ref().is_some_and(|c| c.coeffs == coeffs);
        if !hit {
            let hs = regularized_samples(&self.geom, coeffs, self.moll.as_ref());
            let disp = [
                extend_normal_field(&self.geom, &self.grids[0], &hs)?,
                extend_normal_field(&self.geom, &self.grids[1], &hs)?,
            ];
            self.disp_cache = Some(DispCache { coeffs: coeffs.to_vec(), disp });
        }
        Ok(&self.disp_cache.as_ref().expect("filled above").disp)
    }

    fn analytic_w(&mut self, d1: &[Complex64]) -> Result<[[Array2<f64>; 2]; 2]> {
        let hit = self.w_cache.as_ref().is_some_and(|c| c.d1 == d1);
        if !hit {
            let w = if zero_coeffs(d1) {
                let z = |g: &PolarGrid| [g.zeros(), g.zeros()];
                [z(&self.grids[0]), z(&self.grids[1])]
            } else {
                let vs = regularized_samples(&self.geom, d1, self.moll.as_ref());
                let ext = |g: &PolarGrid| -> Result<[Array2<f64>; 2]> {
                    let [a, b] = extend_normal_field(&self.geom, g, &vs)?;
                    Ok([a.value, b.value])
                };
                [ext(&self.grids[0])?, ext(&self.grids[1])?]
            };
            self.w_cache = Some(VelocityCache { d1: d1.to_vec(), w });
        }
        Ok(self.w_cache.as_ref().expect("filled above").w.clone())
    }

    /// Maps for height `coeffs` moving with `d1`, reusing cached extensions.
    fn maps_for(&mut self, coeffs: &[Complex64], d1: &[Complex64]) -> Result<[AleMapData; 2]> {
        let analytic = self.config.ale.velocity == VelocityMode::Analytic;
        if analytic {
            if let Some(c) = self.map_cache.as_ref().filter(|c| c.coeffs == coeffs && c.d1 == d1) {
                return Ok(c.maps.clone());
            }
        }
        let kappa = self.config.ale.kappa;
        let w = match (self.config.ale.velocity, &self.prev_disp) {
            (VelocityMode::FiniteDifference, Some(prev)) => {
                let dt = self.config.time.dt;
                let prev = prev.clone();
                let disp = self.disp_for(coeffs)?;
                let fd = |p: usize| -> [Array2<f64>; 2] {
                    [(&disp[p][0].value - &prev[p][0]) / dt, (&disp[p][1].value - &prev[p][1]) / dt]
                };
                [fd(0), fd(1)]
            }
            _ => self.analytic_w(d1)?,
        };
        let [w0, w1] = w;
        self.disp_for(coeffs)?;
        let disp = &self.disp_cache.as_ref().expect("filled by disp_for").disp;
        let m0 = compute_map_data(&self.grids[0], &disp[0], w0, kappa)?;
        let m1 = compute_map_data(&self.grids[1], &disp[1], w1, kappa)?;
        if analytic {
            self.map_cache = Some(MapCache { coeffs: coeffs.to_vec(), d1: d1.to_vec(), maps: [m0.clone(), m1.clone()] });
        }
        Ok([m0, m1])
    }

    fn check_cfl(&mut self, maps: &[AleMapData; 2]) -> Result<()> {
        let dt = self.config.time.dt;
        for (g, m) in self.grids.iter().zip(maps) {
            let bound = advective_cfl_bound(g, m, self.config.time.cfl_advective);
            if dt > bound {
                match self.config.time.on_cfl {
                    CflPolicy::Abort => return Err(StefanError::Cfl { dt, bound }),
                    CflPolicy::Warn if !self.cfl_warned => {
                        let msg = format!(
                            "advective CFL exceeded at step {}: dt = {dt:.3e} > {bound:.3e}",
                            self.state.step_index
                        );
                        warn!("{msg}");
                        self.warnings.push(msg);
                        self.cfl_warned = true;
                    }
                    CflPolicy::Warn => {}
                }
            }
        }
        Ok(())
    }

    /// Advances one time step. On error the state is left untouched.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.config.time.dt;
        let freeze = self.config.time.freeze_interface;
        let n = self.state.step_index;
        let h = self.state.h.clone();
        let mut guess: Option<Vec<Complex64>> = None;
        let mut outcome = None;
        for _ in 0..self.config.time.coupled_iterations {
            let (coeffs, d1) = match &guess {
                None => (h.coeffs.clone(), h.d1.clone()),
                Some(next) => (
                    h.coeffs.iter().zip(next).map(|(a, b)| 0.5 * (a + b)).collect(),
                    h.coeffs.iter().zip(next).map(|(a, b)| (b - a) / dt).collect(),
                ),
            };
            let maps = self.maps_for(&coeffs, &d1)?;
            self.check_cfl(&maps)?;
            let fields = [
                self.steppers[0].step(&self.grids[0], &self.state.fields[0], &maps[0], n)?,
                self.steppers[1].step(&self.grids[1], &self.state.fields[1], &maps[1], n)?,
            ];
            let next_h = if freeze {
                HeightState { t: h.t + dt, ..h.clone() }
            } else {
                let h_geom = regularized_samples(&self.geom, &coeffs, self.moll.as_ref());
                let ht = interface_velocity(
                    &gamma_trace(&self.grids[1], &fields[1]),
                    &gamma_trace(&self.grids[0], &fields[0]),
                    &self.geom,
                    &h_geom,
                )?;
                let nh = step_interface(&h, &ht, dt, &self.geom.ang)?;
                validate_height(&self.geom, &regularized_samples(&self.geom, &nh.coeffs, self.moll.as_ref()))?;
                nh
            };
            guess = Some(next_h.coeffs.clone());
            outcome = Some((next_h, fields, maps));
        }
        let (next_h, fields, step_maps) = outcome.expect("at least one sweep");
        if self.config.ale.velocity == VelocityMode::FiniteDifference {
            self.prev_disp = Some([
                [step_maps[0].disp[0].clone(), step_maps[0].disp[1].clone()],
                [step_maps[1].disp[0].clone(), step_maps[1].disp[1].clone()],
            ]);
        }
        let maps = self.maps_for(&next_h.coeffs, &next_h.d1)?;
        let [f0, f1] = fields;
        let fields = if next_h.coeffs == h.coeffs {
            [f0, f1]
        } else {
            [
                PhaseField::new(&self.grids[0], f0.q, &maps[0], f0.t)?,
                PhaseField::new(&self.grids[1], f1.q, &maps[1], f1.t)?,
            ]
        };
        self.state = SimulationState { t: next_h.t, h: next_h, fields, maps, step_index: n + 1 };
        Ok(())
    }

    pub fn context<'a>(&'a self, weights: Option<&'a WeightField>) -> DiagContext<'a> {
        let s = &self.state;
        DiagContext {
            geom: &self.geom,
            grids: [&self.grids[0], &self.grids[1]],
            fields: [&s.fields[0], &s.fields[1]],
            maps: [&s.maps[0], &s.maps[1]],
            h: &s.h,
            h0: &self.h0,
            moll: self.moll.as_ref(),
            constants: &self.constants,
            settings: &self.config.diag,
            weights,
        }
    }

    /// Diagnostics at the current state (flags left for the monitor).
    pub fn report(&self) -> Result<(EnergyReport, Option<WeightField>)> {
        compute_report(&self.context(None), self.state.step_index)
    }

    pub fn snapshot(&self, weights: Option<&WeightField>) -> Snapshot {
        let s = &self.state;
        let phase = |p: usize| {
            let g = &self.grids[p];
            let (j_min, j_max) = s.maps[p].j_extrema();
            PhaseSnapshot {
                n_r: g.n_r(),
                n_theta: g.n_theta(),
                r: g.r.clone(),
                q: s.fields[p].q.iter().copied().collect(),
                j_min,
                j_max,
                weight: weights.map(|w| w.get(g.phase).iter().copied().collect()),
            }
        };
        Snapshot {
            schema_version: SCHEMA_VERSION,
            t: s.t,
            step_index: s.step_index,
            r_gamma: self.geom.r_gamma,
            r_outer: self.geom.r_outer,
            n_theta: self.geom.n_theta(),
            kappa: self.config.ale.kappa,
            h: coeffs_to_triples(&s.h.coeffs),
            h0: coeffs_to_triples(&self.h0),
            h_t: coeffs_to_triples(&s.h.d1),
            h_tt: s.h.d2.as_deref().map(coeffs_to_triples),
            h_ttt: s.h.d3.as_deref().map(coeffs_to_triples),
            minus: phase(0),
            plus: phase(1),
            constants: self.constants.clone(),
            provenance: Provenance {
                config_hash: self.config.hash(),
                step_index: s.step_index,
                label: self.config.run.label.clone(),
            },
        }
    }
}

/// Diagnostics recomputed from a snapshot alone (circular reference interface).
pub fn diagnose_snapshot(snap: &Snapshot, settings: &DiagSettings) -> Result<EnergyReport> {
    let geom = ReferenceGeometry::circle(snap.r_gamma, snap.r_outer, snap.n_theta)?;
    let grids = [
        PolarGrid::disc(snap.r_gamma, snap.minus.n_r, snap.n_theta),
        PolarGrid::annulus(snap.r_gamma, snap.r_outer, snap.plus.n_r, snap.n_theta),
    ];
    for (g, p) in grids.iter().zip([&snap.minus, &snap.plus]) {
        let same = p.n_theta == snap.n_theta && p.r.iter().zip(&g.r).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
        if !same {
            return Err(StefanError::Shape(format!("snapshot {} grid does not match a standard grid", g.phase)));
        }
    }
    let moll = if snap.kappa > 0.0 { Some(Mollifier::new(snap.kappa)?.with_table(snap.n_theta / 2)) } else { None };
    let h = HeightState {
        coeffs: triples_to_coeffs(&snap.h)?,
        d1: triples_to_coeffs(&snap.h_t)?,
        d2: snap.h_tt.as_deref().map(triples_to_coeffs).transpose()?,
        d3: snap.h_ttt.as_deref().map(triples_to_coeffs).transpose()?,
        t: snap.t,
    };
    let h0 = triples_to_coeffs(&snap.h0)?;
    let maps = assemble_maps(&geom, &grids, moll.as_ref(), &h.coeffs, &h.d1, snap.kappa)?;
    let field = |p: usize, ps: &PhaseSnapshot| -> Result<PhaseField> {
        let q = Array2::from_shape_vec(grids[p].shape(), ps.q.clone()).map_err(|e| StefanError::Shape(e.to_string()))?;
        PhaseField::new(&grids[p], q, &maps[p], snap.t)
    };
    let fields = [field(0, &snap.minus)?, field(1, &snap.plus)?];
    let ctx = DiagContext {
        geom: &geom,
        grids: [&grids[0], &grids[1]],
        fields: [&fields[0], &fields[1]],
        maps: [&maps[0], &maps[1]],
        h: &h,
        h0: &h0,
        moll: moll.as_ref(),
        constants: &snap.constants,
        settings,
        weights: None,
    };
    Ok(compute_report(&ctx, snap.step_index)?.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub config_hash: String,
    pub eigenvalues: [f64; 3],
    pub constants: SpectralConstants,
    pub admissibility: AdmissibilityReport,
    pub steps_taken: usize,
    pub t_final: f64,
    pub stopped_early: bool,
    pub warnings: Vec<String>,
    pub bootstrap: BootstrapSummary,
}

pub struct RunOutcome {
    pub series: Vec<EnergyReport>,
    pub summary: RunSummary,
    pub simulation: Simulation,
}

struct Output {
    dir: PathBuf,
    csv: bool,
    json: bool,
}

impl Output {
    fn new(dir: &Path, config: &SimConfig) -> Result<Self> {
        let json = config.output.format.iter().any(|f| f == "json");
        fs::create_dir_all(dir).map_err(|e| StefanError::io(dir, e))?;
        if json {
            let snaps = dir.join("snapshots");
            fs::create_dir_all(&snaps).map_err(|e| StefanError::io(&snaps, e))?;
        }
        Ok(Output { dir: dir.to_path_buf(), csv: config.output.format.iter().any(|f| f == "csv"), json })
    }

    fn snapshot(&self, sim: &Simulation, weights: Option<&WeightField>, name: &str) -> Result<()> {
        if self.json {
            sim.snapshot(weights).write(&self.dir.join("snapshots").join(name))?;
        }
        Ok(())
    }

    fn timeseries(&self, series: &[EnergyReport], diag: &DiagSettings) -> Result<()> {
        if self.csv {
            emit_timeseries(series, &self.dir.join("timeseries.csv"), diag.order_cap, diag.third_derivatives)?;
        }
        Ok(())
    }

    fn summary(&self, summary: &RunSummary) -> Result<()> {
        if self.json {
            let path = self.dir.join("summary.json");
            let text = serde_json::to_string_pretty(summary).map_err(|e| StefanError::Format(e.to_string()))?;
            fs::write(&path, text).map_err(|e| StefanError::io(&path, e))?;
        }
        Ok(())
    }
}

fn snapshot_name(step: usize) -> String {
    format!("snap_{step:07}.json")
}

/// Runs the configured simulation. With `out_dir`, writes `timeseries.csv`,
/// `summary.json` and `snapshots/`; on a runtime failure the last valid
/// state and the partial series are written before the error is returned.
pub fn run_simulation(config: SimConfig, out_dir: Option<&Path>) -> Result<RunOutcome> {
    run_simulation_observed(config, out_dir, |_| {})
}

/// [`run_simulation`] with a callback invoked after every completed step.
pub fn run_simulation_observed(
    config: SimConfig,
    out_dir: Option<&Path>,
    mut observe: impl FnMut(&Simulation),
) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut sim = Simulation::new(config)?;
    let out = out_dir.map(|d| Output::new(d, &sim.config)).transpose()?;
    let cfg = sim.config.clone();
    let n_steps = cfg.n_steps();
    let keep_weights = cfg.diag.emit_weights;
    let mut series = Vec::new();
    let mut stopped_early = false;

    let (r0, w0) = sim.report()?;
    series.push(r0);
    if let Some(o) = &out {
        o.snapshot(&sim, w0.as_ref().filter(|_| keep_weights), &snapshot_name(0))?;
    }
    let mut last_weights = w0;
    info!("{}: {n_steps} steps of dt = {}", cfg.run.label, cfg.time.dt);

    for _ in 0..n_steps {
        if cfg.run.wall_clock_limit > 0.0 && start.elapsed().as_secs_f64() > cfg.run.wall_clock_limit {
            let msg = format!("wall-clock limit reached at t = {:.6}; stopping early", sim.state.t);
            warn!("{msg}");
            sim.warnings.push(msg);
            stopped_early = true;
            break;
        }
        let stepped = sim.step().and_then(|_| {
            observe(&sim);
            let k = sim.state.step_index;
            if k % cfg.time.diag_every == 0 || k == n_steps {
                let (r, w) = sim.report()?;
                series.push(r);
                last_weights = w;
            }
            if let Some(o) = &out {
                if cfg.output.snapshot_every > 0 && k % cfg.output.snapshot_every == 0 && k != n_steps {
                    o.snapshot(&sim, last_weights.as_ref().filter(|_| keep_weights), &snapshot_name(k))?;
                }
            }
            Ok(())
        });
        if let Err(e) = stepped {
            if let Some(o) = &out {
                let _ = o.snapshot(&sim, None, "last_valid.json");
                monitor_bootstrap(&mut series, &sim.constants, &cfg.diag.envelope);
                let _ = o.timeseries(&series, &cfg.diag);
            }
            return Err(e);
        }
    }

    let bootstrap = monitor_bootstrap(&mut series, &sim.constants, &cfg.diag.envelope);
    let summary = RunSummary {
        label: cfg.run.label.clone(),
        config_hash: cfg.hash(),
        eigenvalues: [sim.eigen[0].value, sim.eigen[1].value, sim.eigen_plus_mixed.value],
        constants: sim.constants.clone(),
        admissibility: sim.admissibility.clone(),
        steps_taken: sim.state.step_index,
        t_final: sim.state.t,
        stopped_early,
        warnings: sim.warnings.clone(),
        bootstrap,
    };
    if let Some(o) = &out {
        o.snapshot(&sim, last_weights.as_ref().filter(|_| keep_weights), &snapshot_name(sim.state.step_index))?;
        o.timeseries(&series, &cfg.diag)?;
        o.summary(&summary)?;
    }
    Ok(RunOutcome { series, summary, simulation: sim })
}
