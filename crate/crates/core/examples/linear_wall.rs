//! Fluctuations of the tagged particle `alpha T` behind a linear wall,
//! compared with the limit law the classification picks.
//!
//!     cargo run --release --example linear_wall

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use tasep_wall::refdist::{Law, Quadrature};
use tasep_wall::stats::{ks_distance, Ecdf};
use tasep_wall::tasep::{sample_with, Constraint};
use tasep_wall::wall::scaling::{classify_linear, LimitLaw};
use tasep_wall::{ParticleConfig, Result, WallProfile};

fn main() -> Result<()> {
    let (v, c, alpha, horizon, runs) = (0.5, 0.05, 0.09, 800.0, 1500);
    let case = classify_linear(v, c, alpha)?;
    println!("case ({}), speed {:.4}, scale {:.4}, law {:?}", case.case, case.xi, case.c1, case.law);

    let wall = WallProfile::linear(c, v, horizon)?;
    let label = (alpha * horizon).round() as usize;
    let cfg = ParticleConfig::step(label);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    let scale = -case.c1 * horizon.powf(1.0 / 3.0);
    let mut xs = Vec::with_capacity(runs);
    for _ in 0..runs {
        let tr = sample_with(&cfg, 0.0, horizon, Constraint::Wall(&wall), &mut rng)?;
        xs.push((tr.position(label as i64, horizon) as f64 - case.xi * horizon) / scale);
    }
    let ecdf = Ecdf::new(xs);
    let q = Quadrature::new(60);
    let limit = |s: f64| match case.law {
        LimitLaw::Goe => q.cdf_or_limit(Law::Tw1, 2f64.powf(2.0 / 3.0) * s),
        _ => q.cdf_or_limit(Law::Tw2, s),
    };
    println!("mean {:.3}, variance {:.3}", ecdf.mean(), ecdf.variance());
    println!("KS distance to the limit at T = {horizon}: {:.4}", ks_distance(&ecdf, limit));
    Ok(())
}
