//! Time-series CSV and snapshot JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use crate::diagnostics::norms::EXACT_INTERIOR_ORDER;
use crate::diagnostics::{BootstrapFlags, EnergyReport};
use crate::error::{Result, StefanError};
use crate::spectral::SpectralConstants;

/// Reads a number that may have been written as `null` (non-finite).
pub fn f64_or_nan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

pub const TIMESERIES_COLUMNS: [&str; 29] = [
    "t",
    "X_minus",
    "X_plus",
    "E_minus",
    "E_plus",
    "D_minus",
    "D_plus",
    "E_gamma",
    "D_gamma",
    "E_beta_minus",
    "E_beta_plus",
    "h_t_2p5",
    "h_dev_2p5",
    "sup_E_minus",
    "sup_E_plus",
    "sup_E_gamma",
    "int_D_minus",
    "int_D_plus",
    "int_D_gamma",
    "sup_h_dev_2p5",
    "S_total",
    "E_kappa_minus",
    "E_kappa_plus",
    "D_kappa_minus",
    "D_kappa_plus",
    "W_minus_min",
    "W_minus_max",
    "W_plus_min",
    "W_plus_max",
];

fn fmt_num(out: &mut String, x: f64) {
    if x.is_nan() {
        out.push_str("nan");
    } else if x.is_infinite() {
        out.push_str(if x > 0.0 { "inf" } else { "-inf" });
    } else {
        write!(out, "{x:.16e}").expect("write to string");
    }
}

fn row_values(r: &EnergyReport) -> [f64; 29] {
    let s = &r.s;
    let run = &r.running;
    let n = &r.natural;
    let w = r.weight_extrema;
    [
        r.t,
        r.x_minus,
        r.x_plus,
        s.e_minus,
        s.e_plus,
        s.d_minus,
        s.d_plus,
        s.e_gamma,
        s.d_gamma,
        s.e_beta_minus,
        s.e_beta_plus,
        s.h_t_2p5,
        s.h_dev_2p5,
        run.sup_e_minus,
        run.sup_e_plus,
        run.sup_e_gamma,
        run.int_d_minus,
        run.int_d_plus,
        run.int_d_gamma,
        run.sup_h_dev_2p5,
        run.s_total,
        n.e_minus,
        n.e_plus,
        n.d_minus,
        n.d_plus,
        w[0],
        w[1],
        w[2],
        w[3],
    ]
}

/// CSV text: a `# truncation` comment, the header, one row per report.
pub fn timeseries_csv(series: &[EnergyReport], order_cap: usize, third_derivatives: bool) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# truncation: order_cap={order_cap} interior_exact_order={EXACT_INTERIOR_ORDER} interior_surrogate=angular third_time_derivatives={third_derivatives}"
    )
    .expect("write to string");
    let mut header: Vec<&str> = TIMESERIES_COLUMNS.to_vec();
    header.extend(BootstrapFlags::NAMES);
    out.push_str(&header.join(","));
    out.push('\n');
    for r in series {
        let vals = row_values(r);
        for (i, v) in vals.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            fmt_num(&mut out, *v);
        }
        for f in r.flags.values() {
            out.push(',');
            out.push(if f { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

pub fn emit_timeseries(series: &[EnergyReport], path: &Path, order_cap: usize, third_derivatives: bool) -> Result<()> {
    fs::write(path, timeseries_csv(series, order_cap, third_derivatives)).map_err(|e| StefanError::io(path, e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Parses CSV text written by [`timeseries_csv`].
pub fn parse_timeseries(text: &str) -> Result<Table> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| StefanError::Format("missing CSV header".into()))?;
    let columns: Vec<String> = header.split(',').map(String::from).collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|x| x.parse::<f64>()).collect();
        let row = row.map_err(|e| StefanError::Format(format!("row {}: {e}", n + 1)))?;
        if row.len() != columns.len() {
            return Err(StefanError::Format(format!("row {} has {} fields, expected {}", n + 1, row.len(), columns.len())));
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSnapshot {
    pub n_r: usize,
    pub n_theta: usize,
    pub r: Vec<f64>,
    /// Row-major `(n_r, n_theta)`.
    pub q: Vec<f64>,
    pub j_min: f64,
    pub j_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub step_index: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema_version: u32,
    pub t: f64,
    pub step_index: usize,
    pub r_gamma: f64,
    pub r_outer: f64,
    pub n_theta: usize,
    pub kappa: f64,
    /// `[k, Re ĥ_k, Im ĥ_k]` for `k ≥ 0`; `h(θ) = Σ ĥ_k e^{ikθ}` over all `k`.
    pub h: Vec<[f64; 3]>,
    pub h0: Vec<[f64; 3]>,
    pub h_t: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_tt: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_ttt: Option<Vec<[f64; 3]>>,
    pub minus: PhaseSnapshot,
    pub plus: PhaseSnapshot,
    pub constants: SpectralConstants,
    pub provenance: Provenance,
}

pub fn coeffs_to_triples(c: &[Complex64]) -> Vec<[f64; 3]> {
    c.iter().enumerate().map(|(k, z)| [k as f64, z.re, z.im]).collect()
}

pub fn triples_to_coeffs(t: &[[f64; 3]]) -> Result<Vec<Complex64>> {
    t.iter()
        .enumerate()
        .map(|(k, [kk, re, im])| {
            if *kk as usize != k {
                return Err(StefanError::Format(format!("height coefficient {k} is labelled {kk}")));
            }
            Ok(Complex64::new(*re, *im))
        })
        .collect()
}

impl Snapshot {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| StefanError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| StefanError::Format(e.to_string()))?;
        match v.get("schema_version").and_then(|x| x.as_u64()) {
            Some(x) if x == SCHEMA_VERSION as u64 => {}
            other => {
                return Err(StefanError::Format(format!(
                    "unsupported snapshot schema_version {other:?} (expected {SCHEMA_VERSION})"
                )))
            }
        }
        let snap: Snapshot = serde_json::from_value(v).map_err(|e| StefanError::Format(e.to_string()))?;
        for p in [&snap.minus, &snap.plus] {
            if p.q.len() != p.n_r * p.n_theta || p.r.len() != p.n_r {
                return Err(StefanError::Format("phase array sizes do not match the declared shape".into()));
            }
        }
        Ok(snap)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| StefanError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| StefanError::io(path, e))?;
        Self::from_json(&text)
    }
}
