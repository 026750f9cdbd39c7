use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = archex::cli::Cli::parse();
    match archex::cli::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
