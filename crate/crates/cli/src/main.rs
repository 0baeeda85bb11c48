use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use microcavity_cli::commands::{self, RunOptions};
use microcavity_cli::{config, CliError};

/// Photon-pair source in a DBR microcavity: spectra, two-photon
/// amplitudes and Schmidt decompositions.
#[derive(Parser, Debug)]
#[command(name = "microcavity", version)]
struct Cli {
    /// Scenario TOML file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Points per axis of the JSA grid (overrides grid.points).
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Worker threads for JSA builds.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override a configuration key, e.g. --set mirror.rho2=0.99.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bare-grating reflectivity and transmissivity versus k.
    DbrSpectrum,
    /// Cavity reflectivity and intracavity intensity versus k.
    CavitySpectrum,
    /// Two-photon amplitude on the configured grid.
    Jsa,
    /// Schmidt weights, entanglement metrics and signal mode functions.
    Schmidt {
        /// Decompose a stored matrix instead of building one.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Leading Schmidt weight, entropy and cooperativity over a parameter list.
    Sweep {
        /// Short name (rho2, kappa, length, gap, sigma, points) or dotted key.
        #[arg(long)]
        param: String,
        /// Comma-separated values; units are accepted where the key takes them.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    if cli.workers == Some(0) {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = cli.overrides.clone();
    if let Some(n) = cli.grid_points {
        overrides.push(format!("grid.points={n}"));
    }
    let cfg = config::load(&text, &overrides)?;
    let opts = RunOptions {
        workers: cli.workers,
    };
    let out = cli.out.as_path();
    match &cli.command {
        Command::DbrSpectrum => commands::dbr_spectrum(&cfg, out),
        Command::CavitySpectrum => commands::cavity_spectrum(&cfg, out),
        Command::Jsa => commands::jsa(&cfg, &opts, out),
        Command::Schmidt { matrix } => commands::schmidt(&cfg, &opts, matrix.as_deref(), out),
        Command::Sweep { param, values } => {
            let values: Vec<String> = values
                .iter()
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            commands::sweep(&cfg, &opts, param, &values, out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("  {}  {}", f.sha256, f.path);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
