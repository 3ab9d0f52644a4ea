//! GUE and GOE distribution functions from their Fredholm determinants.
//!
//!     cargo run --release --example tracy_widom

use tasep_wall::refdist::{Law, Quadrature};
use tasep_wall::Result;

fn main() -> Result<()> {
    let q = Quadrature::new(60);
    println!("   s      F1(s)      F2(s)  F1(2^(2/3)s)");
    for k in -6..=3 {
        let s = k as f64;
        println!(
            "{s:>4}  {:.7}  {:.7}  {:.7}",
            q.cdf(Law::Tw1, s)?,
            q.cdf(Law::Tw2, s)?,
            q.cdf(Law::Tw1, 2f64.powf(2.0 / 3.0) * s)?
        );
    }
    for law in [Law::Tw1, Law::Tw2] {
        let (mean, var) = q.moments(law);
        println!("{law:?}: mean {mean:.8}, variance {var:.8}");
    }
    Ok(())
}
