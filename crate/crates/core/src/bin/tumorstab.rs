use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use tumorstab::cli::{run, Args, CliError};

fn main() -> ExitCode {
    let args = Args::parse();
    let command = format!("{:?}", args.command).to_lowercase();
    match run(&args).with_context(|| format!("tumorstab {command} failed")) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for file in &report.files {
                eprintln!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
