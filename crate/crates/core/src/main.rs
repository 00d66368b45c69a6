use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use thermowalk::cli::{exit_code, run, Cli};
use thermowalk::Error;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, Error::InvalidArgument(_)) {
                if let Some(sub) = Cli::command().find_subcommand_mut(name) {
                    eprintln!("\n{}", sub.render_usage());
                }
            }
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
