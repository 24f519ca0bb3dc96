use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qsmc_cli::config::{ControllerName, SmoothingName};
use qsmc_cli::{cmd_compare, cmd_run, cmd_sweep, cmd_validate, CliError, Options};

#[derive(Parser, Debug)]
#[command(
    name = "qsmc",
    version,
    about = "Quadrotor quaternion sliding-mode control simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario TOML file. The bundled Table II scenario is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "QSMC_OUT", default_value = "out")]
    out: PathBuf,

    /// Override a config key, e.g. `--set sim.dt=0.0005`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[arg(long, global = true, value_enum)]
    controller: Option<ControllerArg>,

    #[arg(long, global = true, value_enum)]
    smoothing: Option<SmoothingArg>,

    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Simulate one scenario and write trace, metrics and plot script.
    Run,
    /// Run the quaternion and Euler controllers side by side.
    Compare,
    /// Batch of runs from random initial offsets.
    Sweep,
    /// Fast invariant checks.
    Validate,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ControllerArg {
    Quaternion,
    Euler,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SmoothingArg {
    Sign,
    Tanh,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options {
        config: cli.config,
        out: cli.out,
        overrides: cli.overrides,
        controller: cli.controller.map(|c| match c {
            ControllerArg::Quaternion => ControllerName::Quaternion,
            ControllerArg::Euler => ControllerName::Euler,
        }),
        smoothing: cli.smoothing.map(|s| match s {
            SmoothingArg::Sign => SmoothingName::Sign,
            SmoothingArg::Tanh => SmoothingName::Tanh,
        }),
        quiet: cli.quiet,
    };
    let result: Result<(), CliError> = match cli.command {
        Command::Run => cmd_run(&opts).map(drop),
        Command::Compare => cmd_compare(&opts).map(drop),
        Command::Sweep => cmd_sweep(&opts).map(drop),
        Command::Validate => cmd_validate(&opts).map(drop),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.stage());
            ExitCode::from(e.exit_code())
        }
    }
}
