use aep_cli::commands::{self, Overrides};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "aepsim", about = "Channel flow / plate interaction solver", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct CommonOverrides {
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the initial-data generator.
    #[arg(long)]
    seed: Option<u64>,
    /// Solver mode: semi_implicit, picard_window, or vorticity_form.
    #[arg(long)]
    mode: Option<String>,
    /// Plate damping in [0, 1].
    #[arg(long)]
    nu: Option<f64>,
    /// Final time (overrides the config).
    #[arg(long)]
    until: Option<f64>,
    /// Steps between diagnostics rows.
    #[arg(long)]
    cadence: Option<usize>,
}

impl From<&CommonOverrides> for Overrides {
    fn from(c: &CommonOverrides) -> Self {
        Overrides {
            out: c.out.clone(),
            seed: c.seed,
            mode: c.mode.clone(),
            nu: c.nu,
            until: c.until,
            cadence: c.cadence,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configured run and write diagnostics and snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Check initial data (a config or a snapshot) against the
    /// admissibility conditions.
    Validate {
        /// Config (.toml) or snapshot path.
        path: PathBuf,
    },
    /// Run a parameter sweep and emit a convergence table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Sweep kind: nu, dt, or resolution.
        #[arg(long)]
        kind: String,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Print a norm table for every field in a snapshot.
    Norms {
        snapshot: PathBuf,
        /// Norm orders to evaluate.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.5])]
        orders: Vec<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run { config, overrides } => commands::cmd_run(config, &overrides.into()),
        Command::Validate { path } => commands::cmd_validate(path),
        Command::Sweep { config, kind, overrides } => commands::cmd_sweep(config, kind, &overrides.into()),
        Command::Norms { snapshot, orders } => commands::cmd_norms(snapshot, orders),
    };
    ExitCode::from(code as u8)
}
