//! Load a scenario file and run verify from library code.
//! Usage: cargo run --example run_config -- configs/minimal.toml

use sigmaspin::config::load_config;
use sigmaspin::report::summary;
use sigmaspin::runner::{verify, RunOptions};

fn main() -> sigmaspin::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/minimal.toml".into());
    let cfg = load_config(path.as_ref())?;
    let out = std::env::temp_dir().join("sigmaspin-example");
    let records = verify(&cfg, &RunOptions::new(&out))?;
    print!("{}", summary(&records));
    println!("report written to {}", out.display());
    Ok(())
}
