use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use vosbench::commands::{run, Cli};
use vosbench::diag;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            diag::error("fatal", json!({"message": e.to_string(), "exit_code": code}));
            ExitCode::from(code)
        }
    }
}
