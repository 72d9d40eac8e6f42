use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = compcolor::cli::Cli::parse();
    match compcolor::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
