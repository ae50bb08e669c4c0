use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twolayer_cli::{run_cli, Mode};

#[derive(Parser)]
#[command(name = "twolayer", version, about = "Two-layer internal wave models: runs, order checks and dispersion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one model and record monitors and final snapshots
    Simulate(RunArgs),
    /// Residual order of one model against a reference along a mu sweep
    Order(RunArgs),
    /// Phase speeds of a model and of the full two-layer system
    Dispersion(RunArgs),
    /// Integrate two models from the same data and record their distance
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a setting, as section.key=value
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Order(a) => (Mode::Order, a),
        Command::Dispersion(a) => (Mode::Dispersion, a),
        Command::Compare(a) => (Mode::Compare, a),
    };
    let code = run_cli(mode, &args.config, args.out.as_deref(), &args.overrides);
    ExitCode::from(code as u8)
}
