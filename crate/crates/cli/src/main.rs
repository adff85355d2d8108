use std::process::ExitCode;

use clap::Parser;

mod bench;
mod commands;
mod report;

#[derive(Parser)]
#[command(
    name = "selfjoin",
    version,
    about = "Grid-indexed distance-similarity self-join over low-dimensional point data"
)]
struct Cli {
    #[command(subcommand)]
    command: commands::Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
