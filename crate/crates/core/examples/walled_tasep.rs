//! Step initial condition behind a linear wall `cT + vt`, driven by site
//! clocks. Prints the first few tagged positions and the JSONL event log
//! head, then compares with the same clocks and no wall.
//!
//!     cargo run --release --example walled_tasep

use tasep_wall::tasep::{evolve, evolve_with, window_for, Constraint};
use tasep_wall::{ClockField, ParticleConfig, Result, WallProfile};

fn main() -> Result<()> {
    let horizon = 40.0;
    let cfg = ParticleConfig::step(30);
    let wall = WallProfile::linear(0.1, 0.5, horizon)?;
    let (lo, hi) = window_for(&cfg, horizon);
    let clocks = ClockField::new(2024, lo, hi)?;

    let walled = evolve_with(&cfg, &clocks, 0.0, horizon, Constraint::Wall(&wall))?;
    let free = evolve(&cfg, &clocks, 0.0, horizon)?;
    println!("wall at T: {:.1}", wall.value(horizon));
    println!("label  walled  free");
    for label in [1, 2, 5, 10, 20, 30] {
        println!("{label:>5}  {:>6}  {:>4}", walled.position(label, horizon), free.position(label, horizon));
    }

    let mut log = Vec::new();
    walled.write_jsonl(&mut log)?;
    let text = String::from_utf8_lossy(&log);
    println!("\nfirst events:");
    for line in text.lines().take(5) {
        println!("  {line}");
    }
    Ok(())
}
