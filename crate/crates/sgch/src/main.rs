use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sgch::cli::{run, Preset};
use sgch::config::Settings;

/// Numerical experiments for the stochastic generalized Camassa-Holm equation.
#[derive(Parser)]
#[command(name = "sgch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset and write its results under `<out>/<preset>/`.
    Run {
        /// Preset name; see `sgch presets`.
        preset: String,
        #[command(flatten)]
        settings: Box<Settings>,
    },
    /// List the presets.
    Presets,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Presets => {
            for preset in Preset::ALL {
                println!("{:<22}{}", preset.name(), preset.description());
            }
            ExitCode::SUCCESS
        }
        Command::Run { preset, settings } => {
            let status = run(&preset, &settings);
            eprintln!("{}", status.message);
            ExitCode::from(status.code)
        }
    }
}
