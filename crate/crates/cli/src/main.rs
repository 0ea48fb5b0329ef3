mod cli;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use vcdim::ErrorCategory;

use cli::{Cli, Command};

/// Exit status for a failed run. Library errors map by category; anything
/// else (I/O outside the library, bad output paths) is 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(e) = err.chain().find_map(|e| e.downcast_ref::<vcdim::Error>()) else {
        return 1;
    };
    match e.category() {
        ErrorCategory::Config => 3,
        ErrorCategory::Input => 4,
        ErrorCategory::Data => 5,
        ErrorCategory::Numeric => 6,
        ErrorCategory::Selection => 7,
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    match &cli.command {
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Xi(a) => commands::xi_cmd(a),
        Command::Fit(a) => commands::fit_cmd(a),
        Command::Select(a) => commands::select_cmd(a),
        Command::Compare(a) => commands::compare_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
