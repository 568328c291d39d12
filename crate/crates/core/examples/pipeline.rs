//! Runs a subcommand through the library runner, as the command line does.
//!
//! cargo run --release --example pipeline -- <subcommand> [out_dir]

use std::path::{Path, PathBuf};

use ifslab::config::load_config;
use ifslab::runner::{exit_code, run_with_workers, Format, Subcommand};

fn main() -> ifslab::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let sub: Subcommand = args.next().unwrap_or_else(|| "sync".into()).parse()?;
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ifslab-pipeline"));
    let spec = load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/demo.json"))?;
    let result = run_with_workers(sub, &spec, &out, Format::Json, 42, None);
    if let Ok(outcome) = &result {
        for f in &outcome.files {
            println!("wrote {}", f.display());
        }
    }
    println!("exit code {}", exit_code(&result));
    result.map(|_| ())
}
