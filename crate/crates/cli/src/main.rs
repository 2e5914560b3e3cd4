mod commands;
mod config;
mod error;
mod recipes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Output;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "mlz", version, about = "Solvable multistate Landau-Zener models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in configuration (see `mlz recipes`).
    #[arg(long)]
    recipe: Option<String>,
}

#[derive(Args)]
struct Input {
    #[command(flatten)]
    source: Source,
    /// Directory for output files; without it the main result goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the integrability conditions of a model.
    Validate(Input),
    /// Transition probability matrices.
    Probabilities {
        #[command(flatten)]
        input: Input,
        /// semiclassical, scattering, numeric or all
        #[arg(long)]
        method: Option<String>,
    },
    /// Adiabatic energies and exact level crossings.
    Spectrum(Input),
    /// Transition matrices along the configured parameter axes.
    Sweep {
        #[command(flatten)]
        input: Input,
        /// semiclassical, scattering or numeric
        #[arg(long)]
        method: Option<String>,
    },
    /// Restrict a bowtie family to a time contour and check the two-band constraints.
    Pullback(Input),
    /// Check the commuting-family conditions of a bowtie family.
    MtlzCheck(Input),
    /// List built-in recipes, or print one as a config.
    Recipes { name: Option<String> },
}

fn load(source: &Source) -> Result<RunConfig, CliError> {
    match (&source.config, &source.recipe) {
        (Some(path), _) => config::load_config(path),
        (None, Some(name)) => recipes::recipe(name),
        (None, None) => Err(CliError::Config("either --config or --recipe is required".into())),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let with_input = |input: &Input| -> Result<(RunConfig, Output), CliError> {
        Ok((load(&input.source)?, Output::new(input.out.clone())?))
    };
    match &cli.command {
        Command::Validate(i) => {
            let (cfg, out) = with_input(i)?;
            commands::validate(&cfg, &out)
        }
        Command::Probabilities { input, method } => {
            let (cfg, out) = with_input(input)?;
            commands::probabilities(&cfg, method.as_deref(), &out)
        }
        Command::Spectrum(i) => {
            let (cfg, out) = with_input(i)?;
            commands::spectrum(&cfg, &out)
        }
        Command::Sweep { input, method } => {
            let (cfg, out) = with_input(input)?;
            commands::run_sweep(&cfg, method.as_deref(), &out)
        }
        Command::Pullback(i) => {
            let (cfg, out) = with_input(i)?;
            commands::pullback(&cfg, &out)
        }
        Command::MtlzCheck(i) => {
            let (cfg, out) = with_input(i)?;
            commands::mtlz_check(&cfg, &out)
        }
        Command::Recipes { name: None } => {
            for r in recipes::RECIPES {
                println!("{r}");
            }
            Ok(0)
        }
        Command::Recipes { name: Some(name) } => {
            let cfg = recipes::recipe(name)?;
            println!("{}", serde_json::to_string_pretty(&cfg).expect("serializable config"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
