use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{error, info, warn};
use serde_json::json;

use stefan_core::config::SimConfig;
use stefan_core::diagnostics::monitor_bootstrap;
use stefan_core::io::{timeseries_csv, Snapshot};
use stefan_core::oracles::{
    annulus_eigen_oracle, annulus_harmonic_oracle, eigen_oracle_disc, radial_two_phase_oracle, ShootingEnd,
};
use stefan_core::sim::{diagnose_snapshot, run_simulation, Simulation};
use stefan_core::{Result, StefanError};

#[derive(Parser)]
#[command(name = "stefan2p", version, about = "Two-phase Stefan problem on a disc/annulus in ALE coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write snapshots, the time series and a summary.
    Run {
        config: PathBuf,
        /// Output directory (defaults to output.dir from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report admissibility of the initial data and the spectral constants.
    Check { config: PathBuf },
    /// Recompute diagnostics from snapshots; prints CSV to stdout.
    Diag {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
        /// Take diagnostic settings from this config instead of the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reference computations; each prints CSV to stdout.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum OuterWall {
    Dirichlet,
    Neumann,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// First Dirichlet eigenvalue of a disc (Bessel root) or of an annulus (shooting).
    Eigen {
        /// Disc radius, or the inner radius when --r-outer is given.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        r_outer: Option<f64>,
        #[arg(long, value_enum, default_value_t = OuterWall::Dirichlet)]
        outer: OuterWall,
        #[arg(long, default_value_t = 4000)]
        steps: usize,
    },
    /// Radial profile of a single-mode harmonic function on an annulus.
    Harmonic {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        inner: f64,
        #[arg(long, default_value_t = 0.0)]
        outer: f64,
        #[arg(long, default_value_t = 1.0)]
        r_in: f64,
        #[arg(long, default_value_t = 2.0)]
        r_out: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
    /// Front history of the radial two-phase problem with affine initial data.
    Radial {
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 2.0)]
        r_outer: f64,
        /// Slope magnitude of the inner temperature, q = -s|r - r0|.
        #[arg(long, default_value_t = 0.5)]
        scale_minus: f64,
        /// Slope magnitude of the outer temperature, q = s|r - r0|.
        #[arg(long, default_value_t = 1.0)]
        scale_plus: f64,
        #[arg(long, default_value_t = 0.1)]
        t_end: f64,
        /// Cells per phase of the coarse run (the fine run uses twice as many).
        #[arg(long, default_value_t = 256)]
        cells: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

fn cmd_run(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = SimConfig::from_path(config)?;
    let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
    info!("writing to {}", dir.display());
    let outcome = run_simulation(cfg, Some(&dir))?;
    let s = &outcome.summary;
    for w in &s.warnings {
        warn!("{w}");
    }
    let flags_ok = s.bootstrap.flags.iter().all(|f| f.all());
    println!(
        "{}: {} steps to t = {:.6}, bootstrap monitors {}{}",
        s.label,
        s.steps_taken,
        s.t_final,
        if flags_ok { "held" } else { "violated (see timeseries.csv)" },
        if s.stopped_early { ", stopped early" } else { "" }
    );
    Ok(())
}

/// Returns whether the data are admissible.
fn cmd_check(config: &Path) -> Result<bool> {
    let cfg = SimConfig::from_path(config)?;
    let sim = Simulation::new(cfg)?;
    let report = json!({
        "eigenvalues": {
            "disc_dirichlet": sim.eigen[0].value,
            "annulus_dirichlet": sim.eigen[1].value,
            "annulus_mixed": sim.eigen_plus_mixed.value,
        },
        "constants": sim.constants,
        "admissibility": sim.admissibility,
        "warnings": sim.warnings,
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| StefanError::Format(e.to_string()))?;
    println!("{text}");
    Ok(sim.admissibility.admissible)
}

fn cmd_diag(snapshots: &[PathBuf], config: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let settings = match config {
        Some(p) => SimConfig::from_path(p)?.diag,
        None => SimConfig::default().diag,
    };
    let mut snaps = snapshots.iter().map(|p| Snapshot::read(p)).collect::<Result<Vec<_>>>()?;
    snaps.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut series = Vec::with_capacity(snaps.len());
    for s in &snaps {
        series.push(diagnose_snapshot(s, &settings)?);
    }
    if let Some(first) = snaps.first() {
        monitor_bootstrap(&mut series, &first.constants, &settings.envelope);
    }
    let text = timeseries_csv(&series, settings.order_cap, settings.third_derivatives);
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| StefanError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_oracle(cmd: OracleCommand) -> Result<String> {
    let mut out = String::new();
    match cmd {
        OracleCommand::Eigen { radius, r_outer, outer, steps } => {
            let value = match r_outer {
                None => eigen_oracle_disc(radius),
                Some(ro) => {
                    let end = match outer {
                        OuterWall::Dirichlet => ShootingEnd::Value,
                        OuterWall::Neumann => ShootingEnd::Slope,
                    };
                    annulus_eigen_oracle(radius, ro, end, steps)?
                }
            };
            out.push_str("quantity,value\n");
            writeln!(out, "lambda1,{value:.16e}").expect("write to string");
        }
        OracleCommand::Harmonic { k, inner, outer, r_in, r_out, points } => {
            let mode = annulus_harmonic_oracle(k, inner, outer, r_in, r_out)?;
            out.push_str("r,value,derivative\n");
            let n = points.max(2);
            for i in 0..n {
                let r = r_in + (r_out - r_in) * i as f64 / (n - 1) as f64;
                writeln!(out, "{r:.16e},{:.16e},{:.16e}", mode.eval(r), mode.derivative(r)).expect("write to string");
            }
        }
        OracleCommand::Radial { r0, r_outer, scale_minus, scale_plus, t_end, cells, samples } => {
            let res = radial_two_phase_oracle(
                r0,
                r_outer,
                &|r| -scale_minus * (r - r0).abs(),
                &|r| scale_plus * (r - r0).abs(),
                t_end,
                cells,
                samples,
            )?;
            writeln!(out, "# refinement_error={:.3e} cells={}", res.refinement_error, res.resolution).expect("write to string");
            out.push_str("t,front\n");
            for (t, s) in res.times.iter().zip(&res.front) {
                writeln!(out, "{t:.16e},{s:.16e}").expect("write to string");
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out).map(|_| true),
        Command::Check { config } => cmd_check(&config),
        Command::Diag { snapshots, config, out } => cmd_diag(&snapshots, config.as_deref(), out.as_deref()).map(|_| true),
        Command::Oracle(cmd) => cmd_oracle(cmd).map(|text| {
            print!("{text}");
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            error!("initial data are not admissible");
            ExitCode::from(3)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
