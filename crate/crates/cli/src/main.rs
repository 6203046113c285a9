use std::process::ExitCode;

use clap::Parser;
use intwave_cli::{run, Cli, CliError, CliResult};

/// Size the global rayon pool from `INTWAVE_THREADS` when it is set.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("INTWAVE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("INTWAVE_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(&cli));
    match result {
        Ok(outcome) => {
            println!("{}: {}", cli.command.name(), outcome.summary);
            println!("wrote {}", outcome.written.json.display());
            if let Some(csv) = &outcome.written.csv {
                println!("wrote {}", csv.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
