//! Second-class particle started at the origin behind a linear wall. Its
//! position over T is uniform on [-1, r] plus an atom at r.
//!
//!     cargo run --release --example second_class

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use tasep_wall::colored::second_class::{limit_law, sample_position};
use tasep_wall::stats::mixture_test;
use tasep_wall::Result;

fn main() -> Result<()> {
    let (v, c, horizon, runs) = (0.5, 0.125, 1000.0, 3000);
    let law = limit_law(v, c)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
    let xs = (0..runs).map(|_| Ok(sample_position(v, c, horizon, &mut rng)? as f64 / horizon)).collect::<Result<Vec<_>>>()?;
    let report = mixture_test(&xs, &law, 0.05, 10)?;
    println!("limit: atom {:.3} at {:.3}", law.atom, law.right);
    println!("estimate: atom {:.3}, uniform mass {:.3}", report.atom_estimate, report.uniform_estimate);
    println!("uniform part: chi-square {:.2}, p = {:.3}", report.chi_square, report.p_value);
    println!("bins: {:?}", report.bins);
    Ok(())
}
