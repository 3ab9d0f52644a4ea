//! Colored (multi-species) exclusion on a finite window.
//!
//! Every site carries a color; holes carry a color above every integer. The
//! swap operator `W_z` exchanges the contents of `z` and `z + 1` iff the color
//! at `z` is smaller. Applying swaps to the identity coloring gives random
//! permutations whose inverse is obtained by applying the same swaps in the
//! opposite order.

pub mod second_class;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::clock::{ClockField, EventKey};
use crate::error::{Error, Result};
use crate::wall::WallProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Finite(i64),
    Hole,
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Color::Finite(c) => s.serialize_i64(*c),
            Color::Hole => s.serialize_str("hole"),
        }
    }
}

/// Colors on the sites `lo..lo + len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ColoredConfig {
    lo: i64,
    colors: Vec<Color>,
}

impl ColoredConfig {
    pub fn new(lo: i64, colors: Vec<Color>) -> Self {
        Self { lo, colors }
    }

    /// Color `z` at every site `z` of `[lo, hi]`.
    pub fn identity(lo: i64, hi: i64) -> Self {
        Self { lo, colors: (lo..=hi).map(Color::Finite).collect() }
    }

    /// Identity on `[lo, hi]` with every color above `max_color` replaced by a hole.
    pub fn identity_with_holes(lo: i64, hi: i64, max_color: i64) -> Self {
        Self {
            lo,
            colors: (lo..=hi).map(|z| if z > max_color { Color::Hole } else { Color::Finite(z) }).collect(),
        }
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.colors.len() as i64 - 1)
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn color(&self, z: i64) -> Option<Color> {
        let i = z - self.lo;
        (i >= 0).then(|| self.colors.get(i as usize).copied()).flatten()
    }

    /// Apply `W_z`; returns whether a swap took place. Swaps that leave the
    /// window are ignored.
    pub fn swap(&mut self, z: i64) -> bool {
        let i = z - self.lo;
        if i < 0 || i as usize + 1 >= self.colors.len() {
            return false;
        }
        let i = i as usize;
        if self.colors[i] < self.colors[i + 1] {
            self.colors.swap(i, i + 1);
            true
        } else {
            false
        }
    }

    /// Apply `W_{z_1}` first, then `W_{z_2}`, and so on.
    pub fn apply_sequence(&mut self, zs: &[i64]) {
        for &z in zs {
            self.swap(z);
        }
    }

    /// Inverse of a coloring that permutes the window onto itself.
    pub fn inverse(&self) -> Result<Self> {
        let (lo, hi) = self.window();
        let mut out = vec![None; self.colors.len()];
        for (i, c) in self.colors.iter().enumerate() {
            match c {
                Color::Finite(k) if *k >= lo && *k <= hi && out[(*k - lo) as usize].is_none() => {
                    out[(*k - lo) as usize] = Some(Color::Finite(lo + i as i64));
                }
                _ => return Err(Error::InvalidConfig("coloring is not a permutation of its window".into())),
            }
        }
        Ok(Self { lo, colors: out.into_iter().map(Option::unwrap).collect() })
    }

    /// Sites whose color is at most `threshold`, in decreasing order.
    pub fn project(&self, threshold: i64) -> Vec<i64> {
        let mut v: Vec<i64> = self
            .colors
            .iter()
            .enumerate()
            .filter(|(_, c)| **c <= Color::Finite(threshold))
            .map(|(i, _)| self.lo + i as i64)
            .collect();
        v.reverse();
        v
    }
}

/// Which swaps the wall forbids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WallRule {
    /// Suppress `W_z` iff `z + 1 > floor(f(t))`; matches the single-species
    /// wall `x_1 <= floor(f(t))`.
    #[default]
    Floor,
    /// Suppress `W_z` iff `z + 1 >= ceil(f(t))`.
    Ceil,
}

impl WallRule {
    pub fn suppresses(&self, z: i64, f: f64) -> bool {
        if f == f64::INFINITY {
            return false;
        }
        match self {
            WallRule::Floor => (z + 1) as f64 > f.floor(),
            WallRule::Ceil => (z + 1) as f64 >= f.ceil(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum WallMode<'a> {
    None,
    /// Wall value `f(t)` at time `t`.
    Forward(&'a WallProfile),
    /// Wall value `f(T - t)` at time `t`.
    Reversed(&'a WallProfile, f64),
}

impl WallMode<'_> {
    fn value(&self, t: f64) -> f64 {
        match self {
            WallMode::None => f64::INFINITY,
            WallMode::Forward(w) => w.value(t),
            WallMode::Reversed(w, horizon) => w.value(horizon - t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwapAction {
    Swap,
    BlockedOrder,
    WallSuppressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapEvent {
    pub t: f64,
    pub z: i64,
    pub action: SwapAction,
}

#[derive(Debug, Clone)]
pub struct ColoredTrajectory {
    pub initial: ColoredConfig,
    pub last: ColoredConfig,
    pub log: Vec<SwapEvent>,
}

impl ColoredTrajectory {
    /// Sites of applied swaps, in order.
    pub fn applied(&self) -> Vec<i64> {
        self.log.iter().filter(|e| e.action == SwapAction::Swap).map(|e| e.z).collect()
    }

    /// JSON lines `{t, z, action}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for ev in &self.log {
            serde_json::to_writer(&mut w, ev)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Evolve under the clocks of the configuration's window over `(t0, t1]`.
pub fn evolve_colored(
    config: &ColoredConfig,
    clocks: &ClockField,
    t0: f64,
    t1: f64,
    wall: WallMode<'_>,
    rule: WallRule,
) -> Result<ColoredTrajectory> {
    let (lo, hi) = config.window();
    let (clo, chi) = clocks.window();
    if clo > lo || chi < hi {
        return Err(Error::OutOfWindow { site: if clo > lo { lo } else { hi }, lo: clo, hi: chi });
    }
    let sub = ClockField::new(clocks.seed(), lo, hi - 1)?;
    let events = sub.merged_events(t0, t1);
    Ok(evolve_colored_events(config, &events, wall, rule))
}

/// Evolve along an explicit list of (time, site) events.
pub fn evolve_colored_events(
    config: &ColoredConfig,
    events: &[EventKey],
    wall: WallMode<'_>,
    rule: WallRule,
) -> ColoredTrajectory {
    let mut cur = config.clone();
    let mut log = Vec::with_capacity(events.len());
    for &(t, z) in events {
        let action = if rule.suppresses(z, wall.value(t)) {
            SwapAction::WallSuppressed
        } else if cur.swap(z) {
            SwapAction::Swap
        } else {
            SwapAction::BlockedOrder
        };
        log.push(SwapEvent { t, z, action });
    }
    ColoredTrajectory { initial: config.clone(), last: cur, log }
}

/// Time reversal of an event list on `[0, horizon]`.
pub fn reverse_events(events: &[EventKey], horizon: f64) -> Vec<EventKey> {
    events.iter().rev().map(|&(t, z)| (horizon - t, z)).collect()
}

/// Whether applying `zs` forwards to the identity on `[lo, hi]` equals the
/// inverse of applying it backwards.
pub fn symmetry_holds(lo: i64, hi: i64, zs: &[i64]) -> bool {
    let mut fwd = ColoredConfig::identity(lo, hi);
    fwd.apply_sequence(zs);
    let mut bwd = ColoredConfig::identity(lo, hi);
    let rev: Vec<i64> = zs.iter().rev().copied().collect();
    bwd.apply_sequence(&rev);
    bwd.inverse().map(|inv| inv == fwd).unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditSummary {
    pub checked: u64,
    pub violations: u64,
}

/// All swap sequences of length `<= max_len` on a window of `width` sites.
pub fn audit_exhaustive(width: usize, max_len: usize) -> AuditSummary {
    let hi = width as i64 - 1;
    let choices: Vec<i64> = (0..hi).collect();
    let mut checked = 0;
    let mut violations = 0;
    let mut seq: Vec<i64> = Vec::new();
    fn rec(seq: &mut Vec<i64>, choices: &[i64], hi: i64, left: usize, checked: &mut u64, violations: &mut u64) {
        *checked += 1;
        if !symmetry_holds(0, hi, seq) {
            *violations += 1;
        }
        if left == 0 {
            return;
        }
        for &z in choices {
            seq.push(z);
            rec(seq, choices, hi, left - 1, checked, violations);
            seq.pop();
        }
    }
    rec(&mut seq, &choices, hi, max_len, &mut checked, &mut violations);
    AuditSummary { checked, violations }
}

/// `count` random sequences of uniform length in `1..=max_len`.
pub fn audit_random(width: usize, count: u64, max_len: usize, seed: u64) -> AuditSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = width as i64 - 1;
    let mut violations = 0;
    for _ in 0..count {
        let len = rng.gen_range(1..=max_len);
        let zs: Vec<i64> = (0..len).map(|_| rng.gen_range(0..hi)).collect();
        if !symmetry_holds(0, hi, &zs) {
            violations += 1;
        }
    }
    AuditSummary { checked: count, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasep::{evolve, evolve_with, Constraint, ParticleConfig};

    fn perm(c: &ColoredConfig) -> Vec<i64> {
        c.colors()
            .iter()
            .map(|x| match x {
                Color::Finite(k) => *k,
                Color::Hole => i64::MAX,
            })
            .collect()
    }

    #[test]
    fn hole_is_above_every_color() {
        assert!(Color::Finite(i64::MAX) < Color::Hole);
        assert!(Color::Finite(-5) < Color::Finite(3));
    }

    #[test]
    fn two_swaps_on_three_sites() {
        let mut fwd = ColoredConfig::identity(0, 2);
        fwd.apply_sequence(&[0, 1]);
        // site z holds color sigma(z)
        assert_eq!(perm(&fwd), vec![1, 2, 0]);
        let mut bwd = ColoredConfig::identity(0, 2);
        bwd.apply_sequence(&[1, 0]);
        assert_eq!(perm(&bwd), vec![2, 0, 1]);
        assert_eq!(bwd.inverse().unwrap(), fwd);
        assert_eq!(fwd.inverse().unwrap(), bwd);
        let p = ColoredConfig::new(0, vec![Color::Finite(2), Color::Finite(0), Color::Finite(1)]);
        assert_eq!(perm(&p.inverse().unwrap()), vec![1, 2, 0]);
    }

    #[test]
    fn swap_only_in_increasing_order() {
        let mut c = ColoredConfig::new(0, vec![Color::Finite(3), Color::Finite(1)]);
        assert!(!c.swap(0));
        let mut c = ColoredConfig::new(0, vec![Color::Finite(1), Color::Hole]);
        assert!(c.swap(0));
        assert_eq!(c.colors(), &[Color::Hole, Color::Finite(1)]);
        assert!(!c.swap(1));
        assert!(!c.swap(-1));
    }

    #[test]
    fn inverse_rejects_non_permutations() {
        let c = ColoredConfig::new(0, vec![Color::Finite(0), Color::Finite(0)]);
        assert!(c.inverse().is_err());
        let c = ColoredConfig::new(0, vec![Color::Finite(0), Color::Hole]);
        assert!(c.inverse().is_err());
    }

    #[test]
    fn exhaustive_small_window() {
        let s = audit_exhaustive(4, 4);
        assert_eq!(s.checked, 1 + 3 + 9 + 27 + 81);
        assert_eq!(s.violations, 0);
    }

    #[test]
    fn random_sequences_small() {
        let s = audit_random(30, 500, 200, 3);
        assert_eq!(s.violations, 0);
    }

    #[test]
    fn wall_rules_differ_on_integer_walls() {
        assert!(!WallRule::Floor.suppresses(1, 2.0));
        assert!(WallRule::Floor.suppresses(2, 2.0));
        assert!(WallRule::Ceil.suppresses(1, 2.0));
        assert!(!WallRule::Ceil.suppresses(0, 2.0));
        assert!(WallRule::Floor.suppresses(2, 2.5));
        assert!(!WallRule::Ceil.suppresses(1, 2.5));
        assert!(!WallRule::Floor.suppresses(100, f64::INFINITY));
    }

    #[test]
    fn projection_commutes_with_dynamics() {
        for seed in 0..20 {
            let (lo, hi) = (-12, 20);
            let clocks = ClockField::new(seed, lo, hi).unwrap();
            let col = ColoredConfig::identity(lo, hi);
            let ct = evolve_colored(&col, &clocks, 0.0, 4.0, WallMode::None, WallRule::Floor).unwrap();
            let cfg = ParticleConfig::step_at(0, 13);
            let st = evolve(&cfg, &clocks, 0.0, 4.0).unwrap();
            assert_eq!(ct.last.project(0), st.final_config().positions().to_vec());
            // the same holds for every threshold k: colors <= k are particles
            let cfg2 = ParticleConfig::step_at(3, 16);
            let st2 = evolve(&cfg2, &clocks, 0.0, 4.0).unwrap();
            assert_eq!(ct.last.project(3), st2.final_config().positions().to_vec());
        }
    }

    #[test]
    fn projection_commutes_with_wall_floor_rule() {
        let w = WallProfile::staircase(0.0, vec![(0.0, 1.0), (1.0, 3.0), (2.5, 4.0)]).unwrap();
        for seed in 0..30 {
            let (lo, hi) = (-10, 12);
            let clocks = ClockField::new(seed, lo, hi).unwrap();
            let col = ColoredConfig::identity_with_holes(lo, hi, 0);
            let ct = evolve_colored(&col, &clocks, 0.0, 4.0, WallMode::Forward(&w), WallRule::Floor).unwrap();
            let cfg = ParticleConfig::step_at(0, 11);
            let st = evolve_with(&cfg, &clocks, 0.0, 4.0, Constraint::Wall(&w)).unwrap();
            assert_eq!(ct.last.project(0), st.final_config().positions().to_vec());
        }
    }

    #[test]
    fn reversed_events_give_the_inverse() {
        let w = WallProfile::staircase(0.0, vec![(0.0, 1.0), (1.2, 2.0)]).unwrap();
        for seed in 0..30 {
            let (lo, hi) = (-4, 4);
            let t = 3.0;
            let clocks = ClockField::new(seed, lo, hi - 1).unwrap();
            let ev = clocks.merged_events(0.0, t);
            let id = ColoredConfig::identity(lo, hi);
            for rule in [WallRule::Floor, WallRule::Ceil] {
                let fwd = evolve_colored_events(&id, &ev, WallMode::Forward(&w), rule);
                let rev = reverse_events(&ev, t);
                let bwd = evolve_colored_events(&id, &rev, WallMode::Reversed(&w, t), rule);
                assert_eq!(fwd.last.inverse().unwrap(), bwd.last);
            }
        }
    }

    #[test]
    fn jsonl_actions() {
        let clocks = ClockField::new(1, -3, 3).unwrap();
        let w = WallProfile::staircase(0.0, vec![(0.0, 1.0)]).unwrap();
        let ct = evolve_colored(
            &ColoredConfig::identity_with_holes(-3, 3, 0),
            &clocks,
            0.0,
            3.0,
            WallMode::Forward(&w),
            WallRule::Floor,
        )
        .unwrap();
        let mut buf = Vec::new();
        ct.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut seen = std::collections::HashSet::new();
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            seen.insert(v["action"].as_str().unwrap().to_string());
        }
        assert!(seen.contains("swap") && seen.contains("blocked-order") && seen.contains("wall-suppressed"));
    }
}
