//! TASEP with a deterministically moving wall.
//!
//! Site-clock simulation of the totally asymmetric simple exclusion process,
//! its wall-constrained and barrier-frozen variants, colored (multi-species)
//! dynamics, backwards paths, an exact finite-state oracle and numerical
//! Tracy-Widom distributions.

pub mod backpath;
pub mod clock;
pub mod colored;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod refdist;
pub mod stats;
pub mod tasep;
pub mod wall;

pub use clock::ClockField;
pub use error::{Error, Result};
pub use tasep::{ParticleConfig, Trajectory};
pub use wall::{BarrierProfile, WallProfile};
