use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use dissipative_jch::sweep::{emit, run, Cli, RunConfig};
use dissipative_jch::Error;

fn exit_code(err: &Error) -> u8 {
    match err {
        e if e.is_numerical() => 3,
        Error::Io { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on malformed arguments
    let cli = Cli::parse();
    let result = RunConfig::from_cli(cli).and_then(|cfg| {
        let report = run(&cfg)?;
        for note in &report.notes {
            eprintln!("{}: {note}", cfg.command.name());
        }
        emit(&cfg, &report)
    });
    match result {
        Ok(Some(csv)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(csv.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
