mod args;
mod commands;
mod inputs;
mod output;
mod verify;

use clap::Parser;

use args::{Cli, Command};

/// exit 0: success; 1: invalid input; 2: numeric failure; 64: usage error
fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    if let Ok(v) = std::env::var("SQW_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return match kind {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
        }
    };
    let result = match &cli.command {
        Command::Build(a) => commands::run_build(a),
        Command::Spectrum(a) => commands::run_spectrum(a),
        Command::Evolve(a) => commands::run_evolve(a),
        Command::OpenEvolve(a) => commands::run_open_evolve(a),
        Command::Induced(a) => commands::run_induced(a),
        Command::Trajectories(a) => commands::run_trajectories(a),
        Command::Asymptotics(a) => commands::run_asymptotics(a),
        Command::Verify(a) => verify::run_verify(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                2
            } else {
                1
            }
        }
    }
}
