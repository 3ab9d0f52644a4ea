//! Programmatic use of the experiment layer: resolve a preset with
//! overrides, run it on a worker pool and write the usual outputs.
//!
//!     cargo run --release --example run_preset -- [out-dir]

use std::path::PathBuf;

use tasep_wall::experiment::{execute, write_outputs, Params};
use tasep_wall::Result;

fn main() -> Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("tasep-wall-burke"));
    let overrides = [("replicas".to_string(), "2000".to_string()), ("seed".to_string(), "42".to_string())];
    let params = Params::resolve("burke", None, &overrides)?;
    let (outcome, master) = execute(&params, 0)?;
    let manifest = write_outputs(&dir, &params, &outcome, master, 0)?;
    print!("{}", outcome.summary());
    println!("{} files written to {}", manifest.digests.len(), dir.display());
    Ok(())
}
