//! Runs a TOML configuration through the library and prints the CSV.
//!
//! cargo run --example config_run -- crates/core/examples/configs/timescales.toml

use lzs::config::parse_config;
use lzs::run::{execute, resolve};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/timescales.toml").into());
    let config = parse_config(&std::fs::read_to_string(&path)?)?;
    let report = execute(&resolve(&config)?)?;
    print!("{}", report.values);
    eprintln!("{} rows, {} flagged", report.diagnostics.rows, report.diagnostics.flagged);
    Ok(())
}
