//! Command-line front end: each subcommand writes one simulation data set as
//! a CSV table plus a JSON sidecar with the effective configuration and run
//! metadata.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use omclone::Tolerance;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "omclone",
    version,
    about = "Optomechanical photon-phonon cloning simulator",
    long_about = "Simulates a five-mode optomechanical system: dressed cross-Kerr phase \
                  gates, linearized state transfer, and three photon-phonon cloning \
                  protocols, with Lindblad dissipation. Each subcommand writes a CSV \
                  data file and a JSON sidecar named by the config content hash."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for the CSV/JSON pair.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Random seed (overrides the config value).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Integrator tolerances as `rel,abs` (overrides the config value).
    #[arg(long, global = true, value_parser = parse_tolerance)]
    tolerance: Option<Tolerance>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Dressed-parameter map over the tunneling strength and membrane frequency.
    Effparams,
    /// Analytic phase-gate fidelity curves with numerical cross-check markers.
    GateFidelity,
    /// Master-equation average gate fidelity over a (kappa, n_th) grid.
    SweepKappaNth,
    /// Linearized photon-phonon transmission curves per exchange coupling.
    Transmission,
    /// Cloning protocol: ideal outcome, pulse schedule, dissipative map.
    Clone,
    /// Gate fidelity with and without the outside resonators.
    CompareWom,
    /// Classical trajectory of the driven system and its exchange coupling.
    MeanField,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Effparams => "effparams",
            Command::GateFidelity => "gate-fidelity",
            Command::SweepKappaNth => "sweep-kappa-nth",
            Command::Transmission => "transmission",
            Command::Clone => "clone",
            Command::CompareWom => "compare-wom",
            Command::MeanField => "mean-field",
        }
    }
}

fn parse_tolerance(s: &str) -> Result<Tolerance, String> {
    let (rel, abs) = s
        .split_once(',')
        .ok_or_else(|| "expected `rel,abs`".to_string())?;
    let rel: f64 = rel.trim().parse().map_err(|e| format!("rel: {e}"))?;
    let abs: f64 = abs.trim().parse().map_err(|e| format!("abs: {e}"))?;
    if rel <= 0.0 || abs <= 0.0 {
        return Err("tolerances must be positive".into());
    }
    Ok(Tolerance { rel, abs })
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) | CliError::Io(m) => m,
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tolerance {
        config.tolerance = Some(tol);
    }
    config.validate().map_err(CliError::Config)?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let started = Instant::now();
    let outcome = omclone::sweep::with_threads(cli.threads, || match cli.command {
        Command::Effparams => commands::cmd_effparams(&config),
        Command::GateFidelity => commands::cmd_gate_fidelity(&config),
        Command::SweepKappaNth => commands::cmd_sweep_kappa_nth(&config),
        Command::Transmission => commands::cmd_transmission(&config),
        Command::Clone => commands::cmd_clone(&config),
        Command::CompareWom => commands::cmd_compare_wom(&config),
        Command::MeanField => commands::cmd_mean_field(&config),
    });
    let (table, extras) = outcome.map_err(|e| CliError::Runtime(format!("{e:#}")))?;
    let wall = started.elapsed().as_secs_f64();
    let written = output::write_pair(
        &cli.out,
        cli.command.name(),
        &config,
        cli.threads,
        &table,
        extras,
        wall,
    )
    .map_err(|e| CliError::Io(e.to_string()))?;
    eprintln!(
        "{}: {} rows ({} failed cells) -> {} + {}",
        cli.command.name(),
        table.rows.len(),
        table.failures.len(),
        written.csv_path.display(),
        written.json_path.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let report = json!({
                "error": { "kind": err.kind(), "message": err.message() }
            });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
