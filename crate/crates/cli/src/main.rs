use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use goodwin_cli::commands::{self, Table};
use goodwin_cli::config::{self, SimOverrides};
use goodwin_cli::output::Format;
use goodwin_cli::CliError;

/// Analysis and simulation of diffusively coupled Goodwin oscillator networks.
#[derive(Debug, Parser)]
#[command(name = "goodwin-net", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Seed for the initial perturbation.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    dt: Option<f64>,

    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibrium, oscillation index, synchronization test and predicted period.
    Analyze {
        #[arg(long)]
        config: PathBuf,
    },
    /// Integrate the network and measure period, synchronization and oscillation.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rebuild a reference table on the built-in nine-node network.
    Reproduce {
        #[arg(value_enum)]
        which: Table,
    },
    /// Run a parameter grid in parallel.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = SimOverrides {
        seed: cli.seed,
        dt: cli.dt,
        t_end: cli.t_end,
    };
    match &cli.command {
        Command::Analyze { config } => {
            let loaded = config::load(config)?;
            let out = commands::output_dir(cli.out.as_deref(), Some(&loaded));
            commands::cmd_analyze(&loaded, &out, cli.format).map(drop)
        }
        Command::Simulate { config } => {
            let loaded = config::load(config)?;
            let out = commands::output_dir(cli.out.as_deref(), Some(&loaded));
            commands::cmd_simulate(&loaded, overrides, &out, cli.format).map(drop)
        }
        Command::Reproduce { which } => {
            let out = commands::output_dir(cli.out.as_deref(), None);
            commands::cmd_reproduce(*which, overrides, &out, cli.format)
        }
        Command::Sweep { config } => {
            let loaded = config::load(config)?;
            let out = commands::output_dir(cli.out.as_deref(), Some(&loaded));
            commands::cmd_sweep(&loaded, overrides, &out, cli.format).map(drop)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("goodwin-net: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
