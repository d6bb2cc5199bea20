use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emmp_cli::commands::{self, Verdict};

/// Multipole fields outside a sphere: synthesis, extraction by three
/// routes, far fields and the half-wave dipole check.
///
/// Exit status: 0 success, 1 input error, 2 tolerance exceeded.
#[derive(Parser)]
#[command(name = "emmp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample E and H on a sphere from a coefficient file.
    Synth(commands::SynthArgs),
    /// Recover coefficients from a field file by one route.
    Extract(commands::ExtractArgs),
    /// Run all three routes and compare them.
    Equiv(commands::EquivArgs),
    /// Far-field pattern of a coefficient file.
    Farfield(commands::FarfieldArgs),
    /// Half-wave dipole reproduction and its magnetic dual.
    Dipole(commands::DipoleArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Extract(a) => commands::extract_cmd(a),
        Command::Equiv(a) => commands::equiv(a, &mut stdout),
        Command::Farfield(a) => commands::farfield(a),
        Command::Dipole(a) => commands::dipole(a, &mut stdout),
    };
    match result {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::ToleranceExceeded) => {
            eprintln!("tolerance exceeded");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
