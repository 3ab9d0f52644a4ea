//! A single second-class particle started at the origin, with first-class
//! particles on every negative site and a wall `f(t) = c T + v t`.
//!
//! First-class particles see the second-class one as a hole, so they evolve
//! as an ordinary TASEP. The second-class particle is then tracked against
//! that trajectory: it is pushed back whenever the first-class particle
//! right behind it jumps, and it jumps forward on its own attempts when the
//! site ahead is free and allowed by the wall.

use rand::Rng;
use serde::Serialize;

use super::{Color, ColoredConfig, ColoredTrajectory, SwapAction};
use crate::clock::{ClockField, EventKey};
use crate::error::{Error, Result};
use crate::tasep::{evolve_with, extend_sampled, sample_with, Constraint, ParticleConfig, Trajectory, GUARD};
use crate::wall::WallProfile;

/// Uniform density `1/2` on `(-1, right)` plus an atom at `right`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureLaw {
    pub right: f64,
    pub atom: f64,
}

impl MixtureLaw {
    pub fn uniform_mass(&self) -> f64 {
        (self.right + 1.0) / 2.0
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < -1.0 {
            0.0
        } else if x < self.right {
            (x + 1.0) / 2.0
        } else {
            1.0
        }
    }
}

/// Limit law of `position / T`. `c = f64::INFINITY` means no wall.
pub fn limit_law(v: f64, c: f64) -> Result<MixtureLaw> {
    if !(0.0..1.0).contains(&v) || !(c > 0.0) {
        return Err(Error::Domain(format!("need 0 <= v < 1 and c > 0 (v={v}, c={c})")));
    }
    if v + c >= 1.0 {
        return Ok(MixtureLaw { right: 1.0, atom: 0.0 });
    }
    let r = (c * (1.0 - v)).sqrt();
    Ok(MixtureLaw { right: -1.0 + 2.0 * v + 2.0 * r, atom: 1.0 - v - r })
}

/// First-class on `[lo, -1]`, second-class at 0, holes on `[1, hi]`.
pub fn initial_colored(lo: i64, hi: i64) -> ColoredConfig {
    let colors = (lo..=hi)
        .map(|z| match z.cmp(&0) {
            std::cmp::Ordering::Less => Color::Finite(-1),
            std::cmp::Ordering::Equal => Color::Finite(0),
            std::cmp::Ordering::Greater => Color::Hole,
        })
        .collect();
    ColoredConfig::new(lo, colors)
}

/// Path of the color-0 particle as (time, site) after each of its moves,
/// starting with `(t0, initial site)`.
pub fn track(traj: &ColoredTrajectory, t0: f64) -> Result<Vec<(f64, i64)>> {
    let (lo, _) = traj.initial.window();
    let sites: Vec<i64> = traj
        .initial
        .colors()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == Color::Finite(0))
        .map(|(i, _)| lo + i as i64)
        .collect();
    if sites.len() != 1 {
        return Err(Error::InvalidConfig(format!("expected one color-0 particle, found {}", sites.len())));
    }
    let mut z = sites[0];
    let mut path = vec![(t0, z)];
    for ev in &traj.log {
        if ev.action != SwapAction::Swap {
            continue;
        }
        if ev.z == z {
            z += 1;
            path.push((ev.t, z));
        } else if ev.z + 1 == z {
            z -= 1;
            path.push((ev.t, z));
        }
    }
    Ok(path)
}

fn wall_for(v: f64, c: f64, horizon: f64) -> Result<WallProfile> {
    if c == f64::INFINITY {
        Ok(WallProfile::unbounded())
    } else {
        WallProfile::affine(c * horizon, v)
    }
}

enum Outcome {
    Done(i64),
    NeedLabel,
}

/// Tracker state: position, last event key, label right behind and label
/// right ahead (if any).
struct Walker {
    key: EventKey,
    z: i64,
    behind: i64,
    ahead: Option<i64>,
}

impl Walker {
    fn new(t0: f64) -> Self {
        Self { key: (t0, i64::MIN), z: 0, behind: 1, ahead: None }
    }

    fn run<F>(&mut self, first: &Trajectory, wall: &WallProfile, horizon: f64, mut attempt: F) -> Result<Outcome>
    where
        F: FnMut(i64, EventKey) -> Result<f64>,
    {
        let never: EventKey = (f64::INFINITY, i64::MAX);
        loop {
            if !first.has_label(self.behind) {
                return Ok(Outcome::NeedLabel);
            }
            let t = self.key.0;
            let z = self.z;
            let xb = first.position(self.behind, t);
            let (other, push) = if xb == z - 1 {
                (first.departure(self.behind, z - 1).map_or(never, |d| (d, z - 1)), true)
            } else {
                (first.arrival(self.behind, z - 1).map_or(never, |a| (a, z - 2)), false)
            };
            let e = attempt(z, self.key)?;
            let own: EventKey = (e, z);
            let next = if own < other { own } else { other };
            if next.0 > horizon {
                return Ok(Outcome::Done(z));
            }
            if own < other {
                let blocked = self.ahead.is_some_and(|a| first.position_before(a, e) == z + 1);
                if !blocked && wall.effective(e) > z {
                    self.z += 1;
                }
                self.key = own;
            } else {
                if push {
                    self.z -= 1;
                    self.ahead = Some(self.behind);
                    self.behind += 1;
                }
                self.key = other;
            }
        }
    }
}

/// Position at `horizon`, driven by the site clocks.
///
/// `labels` first-class particles start on `-labels..=-1`; the clock window
/// must cover them and the wall's reach plus the guard band.
pub fn position_with_clocks(clocks: &ClockField, v: f64, c: f64, horizon: f64, labels: usize) -> Result<i64> {
    let wall = wall_for(v, c, horizon)?;
    let first = evolve_with(&ParticleConfig::step_at(-1, labels), clocks, 0.0, horizon, Constraint::Wall(&wall))?;
    let (_, hi) = clocks.window();
    let mut w = Walker::new(0.0);
    let out = w.run(&first, &wall, horizon, |site, key| {
        if site + 1 > hi - GUARD {
            return Err(Error::Truncation(format!("second-class particle reached site {site}")));
        }
        clocks.next_after(site, key)
    })?;
    match out {
        Outcome::Done(z) => Ok(z),
        Outcome::NeedLabel => Err(Error::Truncation(format!("more than {labels} first-class labels needed"))),
    }
}

/// Position at `horizon`, sampled with independent exponential clocks.
/// First-class labels are added as the tracker needs them.
pub fn sample_position<R: Rng>(v: f64, c: f64, horizon: f64, rng: &mut R) -> Result<i64> {
    let wall = wall_for(v, c, horizon)?;
    let mut labels = 64usize;
    let mut first = sample_with(&ParticleConfig::step_at(-1, labels), 0.0, horizon, Constraint::Wall(&wall), rng)?;
    let mut w = Walker::new(0.0);
    loop {
        let out = {
            let rng = &mut *rng;
            w.run(&first, &wall, horizon, |_, key| {
                let x: f64 = rng.sample(rand_distr::Exp1);
                Ok(key.0 + x)
            })?
        };
        match out {
            Outcome::Done(z) => return Ok(z),
            Outcome::NeedLabel => {
                let more: Vec<i64> = (labels as i64 + 1..=2 * labels as i64).map(|k| -k).collect();
                extend_sampled(&mut first, &more, Constraint::Wall(&wall), rng)?;
                labels *= 2;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colored::{evolve_colored, WallMode, WallRule};
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn law_examples() {
        let l = limit_law(0.5, 0.125).unwrap();
        assert!((l.right - 0.5).abs() < 1e-12 && (l.atom - 0.25).abs() < 1e-12);
        let l = limit_law(0.0, 0.25).unwrap();
        assert!(l.right.abs() < 1e-12 && (l.atom - 0.5).abs() < 1e-12);
        let l = limit_law(0.0, 1.0).unwrap();
        assert_eq!((l.right, l.atom), (1.0, 0.0));
        let l = limit_law(0.5, 0.6).unwrap();
        assert_eq!((l.right, l.atom), (1.0, 0.0));
        assert!(limit_law(1.0, 0.1).is_err());
        assert!(limit_law(0.5, 0.0).is_err());
        for i in 0..20 {
            for j in 1..20 {
                let l = limit_law(i as f64 / 20.0, j as f64 / 10.0).unwrap();
                assert!((l.uniform_mass() + l.atom - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn track_requires_one_second_class() {
        let cfg = ColoredConfig::identity_with_holes(-3, 3, -1);
        let clocks = ClockField::new(0, -3, 3).unwrap();
        let ct = evolve_colored(&cfg, &clocks, 0.0, 1.0, WallMode::None, WallRule::Floor).unwrap();
        assert!(track(&ct, 0.0).is_err());
    }

    #[test]
    fn walker_matches_colored_engine() {
        for &(v, c, t) in &[(0.5, 0.125, 12.0), (0.2, 0.1, 10.0), (0.0, f64::INFINITY, 8.0), (0.5, 0.6, 10.0)] {
            for seed in 0..40 {
                let (lo, hi) = (-30, 30);
                let clocks = ClockField::new(seed, lo, hi + GUARD).unwrap();
                let wall = wall_for(v, c, t).unwrap();
                let init = initial_colored(lo, hi);
                let ct = evolve_colored(&init, &clocks, 0.0, t, WallMode::Forward(&wall), WallRule::Floor).unwrap();
                let path = track(&ct, 0.0).unwrap();
                assert_eq!(path[0], (0.0, 0));
                let colored_end = path.last().unwrap().1;
                let walker_end = position_with_clocks(&clocks, v, c, t, 30).unwrap();
                assert_eq!(colored_end, walker_end, "v={v} c={c} seed={seed}");
            }
        }
    }

    #[test]
    fn sampled_positions_stay_in_range() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        let t = 200.0;
        let mut below = 0;
        for _ in 0..200 {
            let z = sample_position(0.5, 0.125, t, &mut rng).unwrap();
            assert!(z as f64 >= -t - 50.0 && z as f64 <= 0.125 * t + 0.5 * t);
            if (z as f64) < -0.5 * t {
                below += 1;
            }
        }
        // uniform part puts about 1/4 of the mass below -T/2
        assert!(below > 20 && below < 90, "{below}");
    }
}
