use std::process::ExitCode;

use clap::Parser;

use scribeforge_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let strict = cli.strict;
    match run(cli) {
        Ok(report) => {
            println!("{}", report.to_json());
            if strict && !report.failures.is_empty() {
                eprintln!("{} line(s) failed", report.failures.len());
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
