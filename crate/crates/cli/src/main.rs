//! `normforge` — evaluate, design, and simulate reputation-based social
//! norms from the command line.

mod commands;
mod figures;
mod settings;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::OptimizeMode;
use settings::{CliError, CliResult, Settings};
use table::Format;

#[derive(Parser)]
#[command(
    name = "normforge",
    version,
    about = "Reputation-based social norms: evaluation, exact design, and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Key-value config file (lines of `key = value`, `#` comments).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one setting; repeatable. Example: --set params.c=2.5
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output file (subcommands) or directory (figures); stdout by default.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format for tabular subcommands.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Simulation seed; shorthand for --set sim.seed=N.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads; NORMFORGE_JOBS is the fallback, all cores the default.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one social norm: welfare, incentives, and flags.
    Evaluate,
    /// Solve a design problem exactly by enumeration.
    Optimize {
        #[arg(long, value_enum, default_value = "fixed")]
        mode: OptimizeMode,
    },
    /// Print the stationary reputation distribution of a scheme.
    Stationary,
    /// Run the finite-population simulator against the analytic engine.
    Simulate,
    /// Evaluate or optimize across a parameter grid.
    Sweep,
    /// Regenerate a figure dataset (one CSV per panel).
    Figures {
        /// Figure id, e.g. fig7 or fig12c.
        figure: String,
    },
}

fn configure_jobs(jobs: Option<usize>) -> CliResult<()> {
    let requested = match jobs {
        Some(n) => Some(n),
        None => match std::env::var("NORMFORGE_JOBS") {
            Ok(raw) => Some(raw.parse().map_err(|_| {
                CliError::validation(format!("NORMFORGE_JOBS={raw}: not a thread count"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(threads) = requested {
        if threads == 0 {
            return Err(CliError::validation("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|error| CliError::validation(format!("thread pool: {error}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_jobs(cli.jobs)?;
    let mut settings = Settings::load(cli.config.as_deref(), &cli.set)?;
    if let Some(seed) = cli.seed {
        settings.set("sim.seed", seed.to_string());
    }

    let table = match &cli.command {
        Command::Evaluate => commands::evaluate(&settings)?,
        Command::Optimize { mode } => commands::optimize(&settings, *mode)?,
        Command::Stationary => commands::stationary(&settings)?,
        Command::Simulate => commands::simulate(&settings)?,
        Command::Sweep => commands::sweep(&settings)?,
        Command::Figures { figure } => {
            let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
            let written = figures::run_figure(&settings, figure, &out_dir)?;
            for path in written {
                println!("{}", path.display());
            }
            return Ok(());
        }
    };
    table.write(cli.out.as_deref(), cli.format)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("normforge: {error}");
            ExitCode::from(error.code as u8)
        }
    }
}
