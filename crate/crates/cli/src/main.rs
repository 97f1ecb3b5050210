use clap::Parser;

use hcell::{run, RunConfig};

fn main() {
    let config = RunConfig::parse();
    match run(&config) {
        Ok((report, code)) => {
            print!("{report}");
            std::process::exit(code);
        }
        Err(err) => {
            let payload = serde_json::json!({ "error": err.to_string() });
            eprintln!("{payload}");
            std::process::exit(2);
        }
    }
}
