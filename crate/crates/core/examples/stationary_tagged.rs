//! Stationary TASEP: a tagged particle moves as a Poisson process of rate
//! 1 - rho. With step data the particle alpha T sits near (1 - 2 sqrt(alpha)) T.
//!
//!     cargo run --release --example stationary_tagged

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use tasep_wall::tasep::{sample_with, Constraint};
use tasep_wall::{ParticleConfig, Result};

fn main() -> Result<()> {
    let (rho, horizon, runs) = (0.5, 200.0, 2000);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(9);
    let mut moves = Vec::with_capacity(runs);
    for i in 0..runs {
        let cfg = ParticleConfig::bernoulli(rho, 0, (2.0 * horizon) as i64, i as u64)?;
        let tagged = cfg.last_label();
        let tr = sample_with(&cfg, 0.0, horizon, Constraint::Free, &mut rng)?;
        moves.push((tr.position(tagged, horizon) - tr.position(tagged, 0.0)) as f64);
    }
    let mean = moves.iter().sum::<f64>() / runs as f64;
    let var = moves.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    println!("displacement over T = {horizon}: mean {mean:.2}, variance {var:.2} (Poisson: both {})", (1.0 - rho) * horizon);

    for alpha in [0.09, 0.25, 0.49] {
        let t = 1000.0;
        let label = (alpha * t) as usize;
        let tr = sample_with(&ParticleConfig::step(label), 0.0, t, Constraint::Free, &mut rng)?;
        let x = tr.position(label as i64, t) as f64;
        println!("alpha = {alpha}: x/T = {:.4}, hydrodynamic {:.4}", x / t, 1.0 - 2.0 * f64::sqrt(alpha));
    }
    Ok(())
}
