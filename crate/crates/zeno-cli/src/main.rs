//! `zeno`: datasets for a driven qubit under repeated and diffusive weak
//! measurement.
//!
//! Every run writes one table (CSV or JSON) plus a `<stem>.config.json`
//! sidecar holding the fully resolved settings. Feeding that sidecar back via
//! `--config` reproduces the table byte for byte.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;
use zeno::ZenoError;

use commands::*;
use output::{Format, Table};

pub const OUT_DIR_ENV: &str = "ZENO_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("InvalidParameter: {0}")]
    Validation(String),
    #[error("{}: {0}", .0.name())]
    Numerical(#[from] ZenoError),
    #[error("Io: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(e) if e.is_validation() => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "zeno",
    version,
    about = "Phase-space and trajectory datasets for a measured, driven qubit"
)]
#[command(
    after_help = "Exit status: 0 success, 2 invalid input, 3 numerical failure.\n\
Output goes to --out, else $ZENO_OUT_DIR/<command>.<ext>, else ./<command>.<ext>."
)]
struct Cli {
    /// Settings file (TOML, or a JSON sidecar from an earlier run); flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Table format [default: csv]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constant-energy curves p_θ(θ) of the reduced Hamiltonian
    #[command(
        after_help = "Columns: energy, theta_rad, p_theta (NaN where the curve is singular)"
    )]
    Portrait(PortraitArgs),
    /// Saddle points and their growth rates (λ > 1)
    #[command(
        after_help = "Columns: point, theta_rad, p_theta, energy, rate_theta_per_ns, rate_p_theta_per_ns"
    )]
    CriticalPoints(CriticalArgs),
    /// Action from θ_i to a grid of θ_f, closed form and quadrature
    #[command(
        after_help = "Columns: theta_f_rad, action_closed_form, action_quadrature \
(NaN where the interval crosses a nullcline)"
    )]
    Action(ActionArgs),
    /// Time to go from θ = 0 to θ = −π below the Zeno threshold
    #[command(after_help = "Columns: lambda, transition_time_ns, frequency_per_ns")]
    TransitionTime(TransitionArgs),
    /// Segment times and frequencies above the Zeno threshold
    #[command(
        after_help = "Columns: lambda, epsilon_rad, t1_ns, t12_ns, t2_ns, omega1_per_ns, omega12_per_ns, \
omega2_per_ns"
    )]
    ZenoFrequencies(FrequencyArgs),
    /// Normalised final-state density over z_f
    #[command(after_help = "Columns: lambda, z_f, density")]
    Density(DensityArgs),
    /// One stochastic diffusive-readout trajectory
    #[command(after_help = "Columns: t_ns, x, y, z, readout (r = sqrt(tau) dW/dt)")]
    Trajectory(TrajectoryArgs),
    /// Most-likely path of the extended (coordinates + momenta) system
    #[command(
        after_help = "Columns: t_ns, x, y, z, p_x, p_y, p_z, readout, stochastic_hamiltonian"
    )]
    Mlp(MlpArgs),
    /// Per-time mean and variance over many seeded trajectories
    #[command(after_help = "Columns: t_ns, mean_x, mean_y, mean_z, var_x, var_y, var_z")]
    Ensemble(EnsembleArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Portrait(_) => "portrait",
            Command::CriticalPoints(_) => "critical-points",
            Command::Action(_) => "action",
            Command::TransitionTime(_) => "transition-time",
            Command::ZenoFrequencies(_) => "zeno-frequencies",
            Command::Density(_) => "density",
            Command::Trajectory(_) => "trajectory",
            Command::Mlp(_) => "mlp",
            Command::Ensemble(_) => "ensemble",
        }
    }
}

struct Run {
    table: Table,
    resolved: Value,
    note: Option<String>,
}

fn finish<R: Serialize>(resolved: &R, table: Table) -> Result<Run, CliError> {
    let resolved = serde_json::to_value(resolved).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Run {
        table,
        resolved,
        note: None,
    })
}

fn merged<T: Serialize + DeserializeOwned + Default>(
    file: &serde_json::Map<String, Value>,
    flags: &T,
) -> Result<T, CliError> {
    config::overlay(file, flags)
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let file = match &cli.config {
        Some(path) => config::load(path)?,
        None => config::FileConfig::default(),
    };
    let format = cli.format.or(file.format).unwrap_or_default();
    let p = &file.params;
    let run = match &cli.command {
        Command::Portrait(a) => {
            let r = merged(p, a)?.resolve()?;
            finish(&r, r.run()?)?
        }
        Command::CriticalPoints(a) => {
            let r = merged(p, a)?.resolve()?;
            finish(&r, r.run()?)?
        }
        Command::Action(a) => {
            let r = merged(p, a)?.resolve()?;
            finish(&r, r.run()?)?
        }
        Command::TransitionTime(a) => {
            let r = merged(p, a)?.resolve()?;
            finish(&r, r.run()?)?
        }
        Command::ZenoFrequencies(a) => {
            let r = merged(p, a)?.resolve()?;
            finish(&r, r.run()?)?
        }
        Command::Density(a) => {
            let r = merged(p, a)?.resolve()?;
            finish(&r, r.run()?)?
        }
        Command::Trajectory(a) => {
            let r = merged(p, a)?.resolve()?;
            finish(&r, r.run()?)?
        }
        Command::Mlp(a) => {
            let r = merged(p, a)?.resolve()?;
            let (table, note) = r.run()?;
            Run {
                note: Some(note),
                ..finish(&r, table)?
            }
        }
        Command::Ensemble(a) => {
            let r = merged(p, a)?.resolve()?;
            finish(&r, r.run()?)?
        }
    };
    let name = cli.command.name();
    let out = output::resolve_output(cli.out.as_deref(), name, format);
    let sidecar = output::sidecar_path(&out);
    output::write_file(&out, &run.table.render(format))?;
    let meta = json!({
        "command": name,
        "format": format,
        "params": run.resolved,
        "zeno_version": env!("CARGO_PKG_VERSION"),
    });
    let meta = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    output::write_file(&sidecar, &meta)?;
    let mut summary = format!(
        "wrote {} ({} rows), config {}",
        out.display(),
        run.table.rows.len(),
        sidecar.display()
    );
    if let Some(note) = run.note {
        summary.push_str("; ");
        summary.push_str(&note);
    }
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
