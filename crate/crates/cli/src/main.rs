use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use densecode_cli::commands::{execute, Cli};
use densecode_cli::render;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match execute(&cli.command, &echo) {
        Ok(report) => {
            print!("{}", render(&report.finish(), cli.format, cli.precision));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
