//! Command-line surface: threshold maps, bifurcation sweeps, squeezing
//! spectra, the master-equation comparison table, and the verification
//! suite, all emitted as deterministic CSV/text on stdout (and mirrored
//! into an output directory when one is configured).
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or
//! solver error.

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use spsb::fluctuations::{
    dark_mode_squeezing, dark_quadrature_optimum, default_omega_grid, linearize, output_spectrum,
};
use spsb::fock::{oracle_comparison, OraclePoint};
use spsb::meanfield::{
    chi3_bright_state, chi3_sweep, existence_interval, opo_bright_state, opo_sweep,
};
use spsb::models::{chi3_system, opo_system, Chi3Params};
use spsb::polarization::{dark_mode, JonesVector};
use spsb::report::{fmt_bool, fmt_float, Table};
use spsb::verify::run_verification;
use spsb::{C64, ModelKind};

#[derive(Parser)]
#[command(
    name = "spsb",
    version,
    about = "Spontaneous polarization symmetry breaking in nonlinear cavities: \
             thresholds, steady-state sweeps, squeezing spectra, and self-verification"
)]
struct Cli {
    /// Plain-text config file (key = value with [sections] per module).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Model override.
    #[arg(long, global = true, value_parser = ["opo", "chi3"])]
    model: Option<String>,

    /// Output directory; results are mirrored there in addition to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Config override (section.key=value, or key=value for top-level
    /// keys); repeatable, applied in order after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Symmetry-breaking boundaries over a detuning grid (chi3), or the
    /// oscillation threshold (opo)
    Thresholds,
    /// Steady-state bifurcation sweep over the control parameter
    Steady,
    /// Output noise spectrum: dark polarization mode (chi3) or twin-beam
    /// intensity difference (opo)
    Spectrum,
    /// Optimal dark-mode squeezing V(0) across a parameter sweep (chi3)
    SqueezeSweep,
    /// Master-equation steady-state moments against the linearized theory
    Oracle,
    /// Run every verification check and print the pass/fail table
    Verify,
}

enum CliError {
    Config(String),
    Run(spsb::Error),
}

impl From<spsb::Error> for CliError {
    fn from(e: spsb::Error) -> Self {
        CliError::Run(e)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config '{}': {e}", path.display()))
        })?;
        cfg.apply_text(&text).map_err(CliError::Config)?;
    }
    if let Some(model) = &cli.model {
        cfg.apply("", "model", model).map_err(CliError::Config)?;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    for spec in &cli.sets {
        cfg.apply_set(spec).map_err(CliError::Config)?;
    }
    match cfg.model {
        ModelKind::Opo => cfg.opo.validate(),
        ModelKind::Chi3 => cfg.chi3.validate(),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;

    let (filename, text, code) = match cli.cmd {
        Cmd::Thresholds => ("thresholds.csv", cmd_thresholds(&cfg)?, ExitCode::SUCCESS),
        Cmd::Steady => ("steady.csv", cmd_steady(&cfg)?, ExitCode::SUCCESS),
        Cmd::Spectrum => ("spectrum.csv", cmd_spectrum(&cfg)?, ExitCode::SUCCESS),
        Cmd::SqueezeSweep => (
            "squeeze-sweep.csv",
            cmd_squeeze_sweep(&cfg)?,
            ExitCode::SUCCESS,
        ),
        Cmd::Oracle => ("oracle.csv", cmd_oracle(&cfg)?, ExitCode::SUCCESS),
        Cmd::Verify => {
            let report = run_verification(&cfg.tolerances);
            let code = if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            ("verify.txt", report.render(), code)
        }
    };

    print!("{text}");
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create '{}': {e}", dir.display())))?;
        let path = dir.join(filename);
        fs::write(&path, &text)
            .map_err(|e| CliError::Config(format!("cannot write '{}': {e}", path.display())))?;
    }
    Ok(code)
}

/// Resolves the sweep variable ("control" means the model's natural one)
/// and materializes the grid.
fn sweep_axis(
    cfg: &RunConfig,
    natural: &'static str,
    allowed: &[&str],
) -> Result<(String, Vec<f64>), CliError> {
    let var = if cfg.sweep.variable == "control" {
        natural.to_string()
    } else {
        cfg.sweep.variable.clone()
    };
    if !allowed.contains(&var.as_str()) {
        return Err(CliError::Config(format!(
            "sweep variable '{var}' is not valid here (expected one of {})",
            allowed.join(", ")
        )));
    }
    let grid = cfg.sweep.grid.build().map_err(CliError::Config)?;
    Ok((var, grid))
}

fn cmd_thresholds(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.model {
        ModelKind::Chi3 => {
            let grid = cfg.thresholds.build().map_err(CliError::Config)?;
            let mut t = Table::new(&["delta", "rho2_min", "rho2_max", "exists"]);
            for delta in grid {
                let p = Chi3Params {
                    delta,
                    ..cfg.chi3
                };
                let region = existence_interval(&p)?;
                t.push_row(vec![
                    fmt_float(delta),
                    fmt_float(region.lower),
                    fmt_float(region.upper),
                    fmt_bool(region.exists),
                ])?;
            }
            Ok(t.to_csv())
        }
        ModelKind::Opo => {
            let mut t = Table::new(&["pump_threshold"]);
            t.push_row(vec![fmt_float(cfg.opo.threshold_pump())])?;
            Ok(t.to_csv())
        }
    }
}

fn cmd_steady(cfg: &RunConfig) -> Result<String, CliError> {
    let rows = match cfg.model {
        ModelKind::Chi3 => {
            let (_, grid) = sweep_axis(cfg, "rho_sq", &["rho_sq"])?;
            chi3_sweep(&cfg.chi3, &grid)?
        }
        ModelKind::Opo => {
            let (_, grid) = sweep_axis(cfg, "pump", &["pump"])?;
            opo_sweep(&cfg.opo, &grid)?
        }
    };
    let mut t = Table::new(&[
        "control",
        "amp_sig1",
        "amp_sig2",
        "max_re_lambda",
        "bright_exists",
        "trivial_stable",
    ]);
    for row in rows {
        t.push_row(vec![
            fmt_float(row.control),
            fmt_float(row.amp_sig1),
            fmt_float(row.amp_sig2),
            fmt_float(row.max_re_lambda),
            fmt_bool(row.bright_exists),
            fmt_bool(row.trivial_stable),
        ])?;
    }
    Ok(t.to_csv())
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let (gamma_s, spectrum) = match cfg.model {
        ModelKind::Chi3 => {
            let p = &cfg.chi3;
            let state = chi3_bright_state(p)?;
            let sys = chi3_system(p)?;
            let dd = linearize(&sys, &state)?;
            let mode = dark_mode(ModelKind::Chi3, cfg.spectrum.theta);
            let phi = match cfg.spectrum.phi {
                Some(phi) => phi,
                None => dark_quadrature_optimum(&sys, &dd, &mode)?.0,
            };
            let grid = default_omega_grid(p.gamma_s);
            (p.gamma_s, output_spectrum(&sys, &dd, &mode, phi, &grid)?)
        }
        ModelKind::Opo => {
            let p = &cfg.opo;
            let state = opo_bright_state(p)?;
            let sys = opo_system(p)?;
            let dd = linearize(&sys, &state)?;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mode = JonesVector::new(C64::new(s, 0.0), C64::new(-s, 0.0));
            let phi = cfg.spectrum.phi.unwrap_or(0.0);
            let grid = default_omega_grid(p.gamma_s);
            (p.gamma_s, output_spectrum(&sys, &dd, &mode, phi, &grid)?)
        }
    };
    let mut t = Table::new(&["omega_over_gamma_s", "V"]);
    for (omega, v) in &spectrum.samples {
        t.push_row(vec![fmt_float(omega / gamma_s), fmt_float(*v)])?;
    }
    Ok(t.to_csv())
}

fn cmd_squeeze_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.model != ModelKind::Chi3 {
        return Err(CliError::Config(
            "squeeze-sweep applies to the chi3 model (the opo analogue is the \
             twin-beam spectrum)"
                .into(),
        ));
    }
    let (var, grid) = sweep_axis(cfg, "rho_sq", &["rho_sq", "delta"])?;
    let points: Vec<Chi3Params> = grid
        .iter()
        .map(|&v| match var.as_str() {
            "delta" => Chi3Params {
                delta: v,
                ..cfg.chi3
            },
            _ => Chi3Params {
                rho_sq: v,
                ..cfg.chi3
            },
        })
        .collect();
    let rows = dark_mode_squeezing(&points)?;
    let mut t = Table::new(&["delta", "rho2", "g", "gamma_s", "V_min_at_0", "phi_opt"]);
    for row in rows {
        t.push_row(vec![
            fmt_float(row.delta),
            fmt_float(row.rho_sq),
            fmt_float(row.g),
            fmt_float(row.gamma_s),
            fmt_float(row.v_min_at_0),
            fmt_float(row.phi_opt),
        ])?;
    }
    Ok(t.to_csv())
}

fn cmd_oracle(cfg: &RunConfig) -> Result<String, CliError> {
    let opo_cutoff = cfg.oracle.opo_cutoff;
    let chi3_cutoff = cfg.oracle.chi3_cutoff;
    let points: Vec<OraclePoint> = spsb::fock::default_oracle_points()
        .into_iter()
        .map(|p| match p {
            OraclePoint::Opo { params, .. } => OraclePoint::Opo {
                params,
                cutoff: opo_cutoff,
            },
            OraclePoint::Chi3 { params, .. } => OraclePoint::Chi3 {
                params,
                cutoff: chi3_cutoff,
            },
        })
        .collect();
    let rows = oracle_comparison(&points)?;
    let mut t = Table::new(&["point", "moment", "oracle", "linearized", "rel_dev"]);
    for row in rows {
        t.push_row(vec![
            row.point.clone(),
            row.moment.to_string(),
            fmt_float(row.oracle),
            fmt_float(row.linearized),
            fmt_float(row.rel_dev),
        ])?;
    }
    Ok(t.to_csv())
}
