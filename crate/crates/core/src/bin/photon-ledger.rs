use std::process::ExitCode;

use clap::Parser;
use photon_ledger::cli::{error_json, execute, exit_code, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", serde_json::json!({"error": {"kind": "threads", "message": e.to_string()}}));
            return ExitCode::from(2);
        }
    }
    match execute(&args) {
        Ok(outcome) => {
            for p in &outcome.outputs {
                println!("{}", p.display());
            }
            println!("{}", outcome.manifest.display());
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                eprintln!("validation failed; see {}", outcome.manifest.display());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
