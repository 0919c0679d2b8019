use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use disparity_cli::commands::{cmd_ridge, cmd_solve, cmd_sweep, cmd_train, cmd_verify, out_dir_for, Context};
use disparity_cli::config::{self, ExperimentConfig, Format};
use disparity_cli::error::CliResult;

#[derive(Parser)]
#[command(name = "disparity", version, about = "Accuracy disparity of standard and adversarially robust linear classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the top-level seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "DISPARITY_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form standard and robust classifiers with their class-wise losses.
    Solve(Common),
    /// Monte Carlo regression suite against the closed forms.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Also write a JUnit XML report.
        #[arg(long)]
        junit: bool,
        #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
        inject_bias: f64,
    },
    /// Empirical accuracy disparity over an (R, p, ε, seed) grid.
    Sweep(Common),
    /// Ridge regression disparity under a perturbed Gram matrix.
    Ridge(Common),
    /// Adversarial training of linear models on sampled mixtures.
    Train(Common),
}

fn context(common: &Common, required: bool) -> CliResult<Context> {
    let mut config = match &common.config {
        Some(path) => config::load(path)?,
        None if required => return Err(disparity_cli::error::CliError::config("--config", "required for this subcommand")),
        None => toml::from_str::<ExperimentConfig>("").expect("empty config parses"),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let format = common
        .format
        .or_else(|| config.output.as_ref().and_then(|o| o.format))
        .unwrap_or(Format::Csv);
    let out_dir = out_dir_for(&config, common.out.as_deref());
    Ok(Context { config, out_dir, format })
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    match cli.command {
        Command::Solve(c) => cmd_solve(&context(&c, true)?),
        Command::Verify { common, junit, inject_bias } => cmd_verify(&context(&common, false)?, junit, inject_bias),
        Command::Sweep(c) => cmd_sweep(&context(&c, true)?),
        Command::Ridge(c) => cmd_ridge(&context(&c, true)?),
        Command::Train(c) => cmd_train(&context(&c, true)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
