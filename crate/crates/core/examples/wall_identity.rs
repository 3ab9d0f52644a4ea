//! Exact check of the wall/barrier identity: the tail of the walled particle
//! against the survival probability of the free one, both from the master
//! equation of the finite chain.
//!
//!     cargo run --release --example wall_identity

use tasep_wall::oracle::{admissible_levels, verify_wall_identity, DEFAULT_CAPACITY};
use tasep_wall::{Result, WallProfile};

fn main() -> Result<()> {
    let horizon = 2.0;
    let wall = WallProfile::staircase(0.0, vec![(0.3, 1.0), (1.1, 2.0), (1.6, 4.0)])?;
    for n in 1..=3 {
        let levels = admissible_levels(n, &wall, horizon);
        let reports = verify_wall_identity(n, &wall, horizon, &levels, false, DEFAULT_CAPACITY)?;
        println!("n = {n}");
        for r in &reports {
            println!("  s = {:>2}  walled {:.12}  barrier {:.12}  diff {:.1e}", r.s, r.lhs, r.rhs, r.diff);
        }
    }
    Ok(())
}
