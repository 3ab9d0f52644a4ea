//! Swap sequences on a small window: applying a sequence forward and in
//! reverse gives mutually inverse permutations. Also checks the same fact in
//! law for a walled colored chain.
//!
//!     cargo run --release --example color_symmetry

use tasep_wall::colored::{audit_exhaustive, audit_random, WallRule};
use tasep_wall::oracle::{ColoredChain, DEFAULT_CAPACITY};
use tasep_wall::{Result, WallProfile};

fn main() -> Result<()> {
    let all = audit_exhaustive(4, 4);
    println!("exhaustive, 4 sites, length <= 4: {} sequences, {} violations", all.checked, all.violations);

    let random = audit_random(100, 2000, 1000, 7);
    println!("random, 100 sites, length <= 1000: {} sequences, {} violations", random.checked, random.violations);

    let chain = ColoredChain::new(0, 3, DEFAULT_CAPACITY)?;
    let wall = WallProfile::staircase(0.0, vec![(0.0, 1.0), (0.6, 2.0)])?;
    for rule in [WallRule::Floor, WallRule::Ceil] {
        let gap = chain.inversion_gap(&wall, rule, 1.5)?;
        println!("walled chain, {rule:?} rule: max |P(sigma) - P_rev(sigma^-1)| = {gap:.2e}");
    }
    Ok(())
}
