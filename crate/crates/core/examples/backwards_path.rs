//! Backwards path of a tagged particle, and the reset identity: restarting a
//! step at the path position at any earlier time, on the same clocks,
//! reproduces the tagged position.
//!
//!     cargo run --release --example backwards_path

use tasep_wall::backpath::{build_backwards, reset_and_replay};
use tasep_wall::tasep::{evolve, window_for};
use tasep_wall::{ClockField, ParticleConfig, Result};

fn main() -> Result<()> {
    let (t, label) = (60.0, 25);
    let cfg = ParticleConfig::step(40);
    let (lo, hi) = window_for(&cfg, t);
    let traj = evolve(&cfg, &ClockField::new(11, lo, hi)?, 0.0, t)?;
    let path = build_backwards(&traj, label, t)?;

    println!("x_{label}({t}) = {}", traj.position(label, t));
    println!("label changes: {}, ends at label {} on site {}", path.change_times().len(), path.end_label(), path.end_position(&traj));
    for tau in [0.0, 10.0, 30.0, 50.0, t] {
        println!(
            "tau = {tau:>4}: path at label {:>2}, site {:>3}; replay gives {}",
            path.label_at(tau),
            path.position_at(&traj, tau),
            reset_and_replay(&traj, &path, tau)?
        );
    }
    Ok(())
}
