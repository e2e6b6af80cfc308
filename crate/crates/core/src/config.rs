//! Run configuration: a TOML document with flat sections. Every violation is
//! collected before reporting.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::ale::VelocityMode;
use crate::diagnostics::bootstrap::EnvelopeParams;
use crate::diagnostics::DiagSettings;
use crate::geometry::{CurvatureConvention, FourierMode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub messages: Vec<String>,
}

impl ConfigError {
    pub fn single(msg: impl Into<String>) -> Self {
        ConfigError { messages: vec![msg.into()] }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error")?;
        if self.messages.len() > 1 {
            write!(f, "s ({})", self.messages.len())?;
        }
        for m in &self.messages {
            write!(f, "\n  - {m}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryConfig {
    pub r_gamma: f64,
    pub r_outer: f64,
    pub n_theta: usize,
    pub perturb: Vec<FourierMode>,
    pub curvature_convention: CurvatureConvention,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridConfig {
    pub n_r_minus: usize,
    pub n_r_plus: usize,
    /// Height modes kept; defaults to `n_theta / 4`.
    pub k_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AleConfig {
    pub kappa: f64,
    pub tol: f64,
    pub velocity: VelocityMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CflPolicy {
    Warn,
    Abort,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_advective: f64,
    pub on_cfl: CflPolicy,
    pub diag_every: usize,
    pub coupled_iterations: usize,
    /// Keep `h` fixed (frozen-map runs).
    pub freeze_interface: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Q0Preset {
    Zero,
    /// `q⁻ = −s φ₁⁻`, `q⁺ = s ψ⁺` with `ψ⁺` the mixed ground state.
    Eigen,
    /// `q± = ±s± |r − R_Γ|`.
    RadialAffine,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitConfig {
    pub h0: Vec<FourierMode>,
    pub q0_preset: Q0Preset,
    pub q0_scale: f64,
    pub q0_scale_minus: Option<f64>,
    pub q0_scale_plus: Option<f64>,
    pub q0_file: Option<PathBuf>,
}

impl InitConfig {
    pub fn scale_minus(&self) -> f64 {
        self.q0_scale_minus.unwrap_or(self.q0_scale)
    }

    pub fn scale_plus(&self) -> f64 {
        self.q0_scale_plus.unwrap_or(self.q0_scale)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub eta: f64,
    pub rt_delta: f64,
    pub enforce_admissibility: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Vec<String>,
    /// Snapshot cadence in steps; 0 writes only the initial and final states.
    pub snapshot_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub label: String,
    /// Seconds; 0 disables the limit.
    pub wall_clock_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub geometry: GeometryConfig,
    pub grid: GridConfig,
    pub ale: AleConfig,
    pub time: TimeConfig,
    pub init: InitConfig,
    pub analysis: AnalysisConfig,
    pub diag: DiagSettings,
    pub output: OutputConfig,
    pub run: RunConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            geometry: GeometryConfig {
                r_gamma: 1.0,
                r_outer: 2.0,
                n_theta: 256,
                perturb: Vec::new(),
                curvature_convention: CurvatureConvention::Formula,
            },
            grid: GridConfig { n_r_minus: 64, n_r_plus: 64, k_max: 64 },
            ale: AleConfig { kappa: 0.0, tol: 1e-8, velocity: VelocityMode::Analytic },
            time: TimeConfig {
                dt: 1e-3,
                t_end: 0.1,
                cfl_advective: 0.5,
                on_cfl: CflPolicy::Warn,
                diag_every: 10,
                coupled_iterations: 1,
                freeze_interface: false,
            },
            init: InitConfig {
                h0: Vec::new(),
                q0_preset: Q0Preset::Zero,
                q0_scale: 1.0,
                q0_scale_minus: None,
                q0_scale_plus: None,
                q0_file: None,
            },
            analysis: AnalysisConfig { eta: 0.1, rt_delta: 0.0, enforce_admissibility: false },
            diag: DiagSettings::default(),
            output: OutputConfig { dir: PathBuf::from("out"), format: vec!["csv".into(), "json".into()], snapshot_every: 0 },
            run: RunConfig { label: "run".into(), wall_clock_limit: 0.0 },
        }
    }
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("geometry", &["r_gamma", "r_outer", "n_theta", "perturb", "curvature_convention"]),
    ("grid", &["n_r_minus", "n_r_plus", "k_max"]),
    ("ale", &["kappa", "tol", "velocity"]),
    (
        "time",
        &["dt", "t_end", "cfl_advective", "on_cfl", "diag_every", "coupled_iterations", "freeze_interface"],
    ),
    ("init", &["h0", "q0_preset", "q0_scale", "q0_scale_minus", "q0_scale_plus", "q0_file"]),
    ("analysis", &["eta", "rt_delta", "enforce_admissibility"]),
    (
        "diag",
        &["nu", "order_cap", "emit_weights", "third_derivatives", "eps", "ctilde", "clower", "cdecay"],
    ),
    ("output", &["dir", "format", "snapshot_every"]),
    ("run", &["label", "wall_clock_limit"]),
];

fn nearest<'a>(name: &str, candidates: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .map(|c| (strsim::levenshtein(name, c), c))
        .filter(|(d, _)| *d <= 3)
        .min_by_key(|(d, _)| *d)
        .map(|(_, c)| c)
}

fn unknown(what: &str, name: &str, candidates: Vec<&str>) -> String {
    match nearest(name, candidates.into_iter()) {
        Some(s) => format!("unknown {what} `{name}` (did you mean `{s}`?)"),
        None => format!("unknown {what} `{name}`"),
    }
}

struct Reader<'a> {
    section: &'a str,
    table: Option<&'a Table>,
    errors: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn key(&self, k: &str) -> String {
        format!("{}.{k}", self.section)
    }

    fn get(&self, k: &str) -> Option<&Value> {
        self.table.and_then(|t| t.get(k))
    }

    fn float(&mut self, k: &str, default: f64) -> f64 {
        match self.get(k) {
            None => default,
            Some(Value::Float(x)) => *x,
            Some(Value::Integer(i)) => *i as f64,
            Some(v) => {
                let msg = format!("{} must be a number, got {}", self.key(k), v.type_str());
                self.errors.push(msg);
                default
            }
        }
    }

    fn opt_float(&mut self, k: &str) -> Option<f64> {
        self.get(k)?;
        Some(self.float(k, f64::NAN))
    }

    fn uint(&mut self, k: &str, default: usize) -> usize {
        match self.get(k) {
            None => default,
            Some(Value::Integer(i)) if *i >= 0 => *i as usize,
            Some(v) => {
                let msg = format!("{} must be a non-negative integer, got {v}", self.key(k));
                self.errors.push(msg);
                default
            }
        }
    }

    fn boolean(&mut self, k: &str, default: bool) -> bool {
        match self.get(k) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(v) => {
                let msg = format!("{} must be true or false, got {v}", self.key(k));
                self.errors.push(msg);
                default
            }
        }
    }

    fn string(&mut self, k: &str, default: &str) -> String {
        match self.get(k) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => {
                let msg = format!("{} must be a string, got {v}", self.key(k));
                self.errors.push(msg);
                default.to_string()
            }
        }
    }

    fn choice<T: Copy>(&mut self, k: &str, default: T, options: &[(&str, T)]) -> T {
        if self.get(k).is_none() {
            return default;
        }
        let s = self.string(k, "");
        match options.iter().find(|(n, _)| *n == s) {
            Some((_, v)) => *v,
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                let msg = format!("{} = \"{s}\" is not one of {names:?}", self.key(k));
                self.errors.push(msg);
                default
            }
        }
    }

    fn modes(&mut self, k: &str) -> Vec<FourierMode> {
        let Some(v) = self.get(k) else { return Vec::new() };
        let mut out = Vec::new();
        let Value::Array(items) = v else {
            let msg = format!("{} must be a list of [k, amp_cos, amp_sin] triples", self.key(k));
            self.errors.push(msg);
            return out;
        };
        let items = items.clone();
        for (idx, it) in items.iter().enumerate() {
            let nums: Option<Vec<f64>> = match it {
                Value::Array(a) if a.len() == 3 => a
                    .iter()
                    .map(|x| match x {
                        Value::Integer(i) => Some(*i as f64),
                        Value::Float(f) => Some(*f),
                        _ => None,
                    })
                    .collect(),
                _ => None,
            };
            match nums {
                Some(n) if n[0] >= 0.0 && n[0].fract() == 0.0 => {
                    out.push(FourierMode { k: n[0] as u32, amp_cos: n[1], amp_sin: n[2] })
                }
                _ => {
                    let msg = format!("{}[{idx}] must be [k, amp_cos, amp_sin] with integer k >= 0", self.key(k));
                    self.errors.push(msg);
                }
            }
        }
        out
    }
}

fn check(errors: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        errors.push(msg());
    }
}

impl SimConfig {
    /// Parses a TOML document; relative paths resolve against `base`.
    pub fn from_toml_str(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let doc: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::single(format!("syntax: {e}")))?;
        let mut errors = Vec::new();
        for (name, val) in &doc {
            match SCHEMA.iter().find(|(s, _)| s == name) {
                None => errors.push(unknown("section", name, SCHEMA.iter().map(|(s, _)| *s).collect())),
                Some((_, keys)) => match val {
                    Value::Table(t) => {
                        for k in t.keys() {
                            if !keys.contains(&k.as_str()) {
                                let full: Vec<String> = keys.iter().map(|x| format!("{name}.{x}")).collect();
                                errors.push(unknown("key", &format!("{name}.{k}"), full.iter().map(String::as_str).collect()));
                            }
                        }
                    }
                    _ => errors.push(format!("`{name}` must be a section")),
                },
            }
        }
        let d = SimConfig::default();
        let section = |n: &str| doc.get(n).and_then(|v| v.as_table());

        let mut r = Reader { section: "geometry", table: section("geometry"), errors: &mut errors };
        let geometry = GeometryConfig {
            r_gamma: r.float("r_gamma", d.geometry.r_gamma),
            r_outer: r.float("r_outer", d.geometry.r_outer),
            n_theta: r.uint("n_theta", d.geometry.n_theta),
            perturb: r.modes("perturb"),
            curvature_convention: r.choice(
                "curvature_convention",
                CurvatureConvention::Formula,
                &[("formula", CurvatureConvention::Formula), ("flipped", CurvatureConvention::Flipped)],
            ),
        };
        let mut r = Reader { section: "grid", table: section("grid"), errors: &mut errors };
        let grid = GridConfig {
            n_r_minus: r.uint("n_r_minus", d.grid.n_r_minus),
            n_r_plus: r.uint("n_r_plus", d.grid.n_r_plus),
            k_max: r.uint("k_max", geometry.n_theta / 4),
        };
        let mut r = Reader { section: "ale", table: section("ale"), errors: &mut errors };
        let ale = AleConfig {
            kappa: r.float("kappa", d.ale.kappa),
            tol: r.float("tol", d.ale.tol),
            velocity: r.choice(
                "velocity",
                VelocityMode::Analytic,
                &[("analytic", VelocityMode::Analytic), ("finite_difference", VelocityMode::FiniteDifference)],
            ),
        };
        let mut r = Reader { section: "time", table: section("time"), errors: &mut errors };
        let time = TimeConfig {
            dt: r.float("dt", d.time.dt),
            t_end: r.float("t_end", d.time.t_end),
            cfl_advective: r.float("cfl_advective", d.time.cfl_advective),
            on_cfl: r.choice("on_cfl", CflPolicy::Warn, &[("warn", CflPolicy::Warn), ("abort", CflPolicy::Abort)]),
            diag_every: r.uint("diag_every", d.time.diag_every),
            coupled_iterations: r.uint("coupled_iterations", d.time.coupled_iterations),
            freeze_interface: r.boolean("freeze_interface", d.time.freeze_interface),
        };
        let mut r = Reader { section: "init", table: section("init"), errors: &mut errors };
        let init = InitConfig {
            h0: r.modes("h0"),
            q0_preset: r.choice(
                "q0_preset",
                Q0Preset::Zero,
                &[
                    ("zero", Q0Preset::Zero),
                    ("eigen", Q0Preset::Eigen),
                    ("radial_affine", Q0Preset::RadialAffine),
                    ("file", Q0Preset::File),
                ],
            ),
            q0_scale: r.float("q0_scale", d.init.q0_scale),
            q0_scale_minus: r.opt_float("q0_scale_minus"),
            q0_scale_plus: r.opt_float("q0_scale_plus"),
            q0_file: r.get("q0_file").is_some().then(|| {
                let p = PathBuf::from(r.string("q0_file", ""));
                match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p,
                }
            }),
        };
        let mut r = Reader { section: "analysis", table: section("analysis"), errors: &mut errors };
        let analysis = AnalysisConfig {
            eta: r.float("eta", d.analysis.eta),
            rt_delta: r.float("rt_delta", d.analysis.rt_delta),
            enforce_admissibility: r.boolean("enforce_admissibility", d.analysis.enforce_admissibility),
        };
        let mut r = Reader { section: "diag", table: section("diag"), errors: &mut errors };
        let de = EnvelopeParams::default();
        let diag = DiagSettings {
            nu: r.float("nu", d.diag.nu),
            order_cap: r.uint("order_cap", d.diag.order_cap),
            emit_weights: r.boolean("emit_weights", d.diag.emit_weights),
            third_derivatives: r.boolean("third_derivatives", d.diag.third_derivatives),
            envelope: EnvelopeParams {
                eps: r.float("eps", de.eps),
                ctilde: r.float("ctilde", de.ctilde),
                clower: r.float("clower", de.clower),
                cdecay: r.float("cdecay", de.cdecay),
            },
        };
        let mut r = Reader { section: "output", table: section("output"), errors: &mut errors };
        let dir = PathBuf::from(r.string("dir", "out"));
        let format = match r.get("format") {
            None => d.output.format.clone(),
            Some(Value::String(s)) => vec![s.clone()],
            Some(Value::Array(a)) => a.iter().filter_map(|v| v.as_str().map(String::from)).collect(),
            Some(_) => {
                r.errors.push("output.format must be a string or list of strings".into());
                d.output.format.clone()
            }
        };
        let output = OutputConfig {
            dir: match base {
                Some(b) if dir.is_relative() => b.join(dir),
                _ => dir,
            },
            format,
            snapshot_every: r.uint("snapshot_every", d.output.snapshot_every),
        };
        let mut r = Reader { section: "run", table: section("run"), errors: &mut errors };
        let run = RunConfig {
            label: r.string("label", &d.run.label),
            wall_clock_limit: r.float("wall_clock_limit", d.run.wall_clock_limit),
        };
        let cfg = SimConfig { geometry, grid, ale, time, init, analysis, diag, output, run };
        cfg.validate_into(&mut errors);
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { messages: errors })
        }
    }

    pub fn from_path(path: &Path) -> crate::error::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::StefanError::io(path, e))?;
        Ok(Self::from_toml_str(&text, path.parent())?)
    }

    /// Range checks; the eigenvalue-dependent bound on η is checked after the eigensolve.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        self.validate_into(&mut errors);
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { messages: errors })
        }
    }

    fn validate_into(&self, e: &mut Vec<String>) {
        let g = &self.geometry;
        check(e, g.r_gamma > 0.0, || format!("geometry.r_gamma = {} must be > 0", g.r_gamma));
        check(e, g.r_outer > g.r_gamma, || {
            format!("geometry.r_outer = {} must exceed geometry.r_gamma = {}", g.r_outer, g.r_gamma)
        });
        check(e, g.n_theta >= 32 && g.n_theta.is_power_of_two(), || {
            format!("geometry.n_theta = {} must be a power of two >= 32", g.n_theta)
        });
        let gr = &self.grid;
        check(e, gr.n_r_minus >= 8, || format!("grid.n_r_minus = {} must be >= 8", gr.n_r_minus));
        check(e, gr.n_r_plus >= 8, || format!("grid.n_r_plus = {} must be >= 8", gr.n_r_plus));
        check(e, gr.k_max >= 1 && gr.k_max <= g.n_theta / 2 - 1, || {
            format!("grid.k_max = {} must lie in [1, n_theta/2 - 1]", gr.k_max)
        });
        for m in &self.init.h0 {
            check(e, (m.k as usize) <= gr.k_max, || {
                format!("init.h0 mode k = {} exceeds grid.k_max = {}", m.k, gr.k_max)
            });
        }
        let a = &self.ale;
        check(e, a.kappa >= 0.0 && a.kappa < std::f64::consts::PI, || {
            format!("ale.kappa = {} must satisfy 0 <= kappa < pi", a.kappa)
        });
        check(e, a.tol > 0.0, || format!("ale.tol = {} must be > 0", a.tol));
        let t = &self.time;
        check(e, t.dt > 0.0, || format!("time.dt = {} must be > 0", t.dt));
        check(e, t.t_end >= 0.0, || format!("time.t_end = {} must be >= 0", t.t_end));
        check(e, t.cfl_advective > 0.0, || format!("time.cfl_advective = {} must be > 0", t.cfl_advective));
        check(e, t.diag_every >= 1, || "time.diag_every must be >= 1".to_string());
        check(e, (1..=3).contains(&t.coupled_iterations), || {
            format!("time.coupled_iterations = {} must lie in [1, 3]", t.coupled_iterations)
        });
        let i = &self.init;
        check(e, i.q0_scale.is_finite(), || "init.q0_scale must be finite".to_string());
        for (k, v) in [("init.q0_scale_minus", i.q0_scale_minus), ("init.q0_scale_plus", i.q0_scale_plus)] {
            if let Some(v) = v {
                check(e, v.is_finite(), || format!("{k} must be finite"));
            }
        }
        match (&i.q0_preset, &i.q0_file) {
            (Q0Preset::File, None) => e.push("init.q0_preset = \"file\" requires init.q0_file".into()),
            (_, Some(p)) => check(e, p.exists(), || format!("init.q0_file {} does not exist", p.display())),
            _ => {}
        }
        let an = &self.analysis;
        check(e, an.eta > 0.0, || format!("analysis.eta = {} must be > 0", an.eta));
        check(e, an.rt_delta >= 0.0, || format!("analysis.rt_delta = {} must be >= 0", an.rt_delta));
        let dg = &self.diag;
        check(e, dg.nu > 0.0, || format!("diag.nu = {} must be > 0", dg.nu));
        check(e, (1..=4).contains(&dg.order_cap), || format!("diag.order_cap = {} must lie in [1, 4]", dg.order_cap));
        let en = &dg.envelope;
        check(e, en.eps > 0.0, || format!("diag.eps = {} must be > 0", en.eps));
        check(e, en.ctilde >= 1.0, || format!("diag.ctilde = {} must be >= 1", en.ctilde));
        check(e, en.clower >= 0.0, || format!("diag.clower = {} must be >= 0", en.clower));
        check(e, en.cdecay >= 0.0, || format!("diag.cdecay = {} must be >= 0", en.cdecay));
        for f in &self.output.format {
            check(e, f == "csv" || f == "json", || format!("output.format entry \"{f}\" must be \"csv\" or \"json\""));
        }
        check(e, self.run.wall_clock_limit >= 0.0, || "run.wall_clock_limit must be >= 0".to_string());
    }

    /// SHA-256 of the canonical JSON form, in hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn n_steps(&self) -> usize {
        (self.time.t_end / self.time.dt - 1e-9).ceil().max(0.0) as usize
    }
}
