use std::process::ExitCode;

use clap::Parser;
use qsupermap_cli::{format, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{}", format::to_json(&report));
            if !report.pass {
                if let Some(reason) = report.details.get("error").and_then(|v| v.as_str()) {
                    eprintln!("{}: {reason}", report.check);
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
