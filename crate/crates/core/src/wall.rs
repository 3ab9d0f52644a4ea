//! Moving walls, their time-reversed barriers, and the constrained dynamics.
//!
//! A wall `f` is non-decreasing with `f(0) = 0` (a positive start can be
//! allowed explicitly). Only its integer part matters: the front particle is
//! kept at or below `floor(f(t))`. The barrier seen from a target level `s`
//! over a horizon `T` is `b(t) = s - floor(f(T - t))`.

pub mod scaling;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clock::ClockField;
use crate::error::{Error, Result};
use crate::tasep::{evolve_with, Constraint, ParticleConfig, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WallShape {
    /// `f = +inf`.
    Unbounded,
    /// `f(0) = start`, `f(t) = offset + speed * t` for `t > 0`.
    Linear { offset: f64, speed: f64, start: f64 },
    /// `f(0) = start`; on `(from_i, from_{i+1}]` the value is `value_i`.
    Staircase { start: f64, pieces: Vec<(f64, f64)> },
    /// Piecewise linear through `points`, constant after the last one.
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallProfile {
    shape: WallShape,
}

impl WallProfile {
    pub fn unbounded() -> Self {
        Self { shape: WallShape::Unbounded }
    }

    /// `f(0) = 0`, `f(t) = c T + v t` for `t > 0`.
    pub fn linear(c: f64, v: f64, horizon: f64) -> Result<Self> {
        if !(c >= 0.0 && v >= 0.0 && horizon > 0.0) {
            return Err(Error::Wall(format!("linear wall needs c, v >= 0 and T > 0 (c={c}, v={v}, T={horizon})")));
        }
        Ok(Self { shape: WallShape::Linear { offset: c * horizon, speed: v, start: 0.0 } })
    }

    /// `f(t) = offset + v t` for all `t >= 0`, including `t = 0`.
    pub fn affine(offset: f64, v: f64) -> Result<Self> {
        if !(offset >= 0.0 && v >= 0.0) {
            return Err(Error::Wall(format!("affine wall needs offset, v >= 0 (offset={offset}, v={v})")));
        }
        Ok(Self { shape: WallShape::Linear { offset, speed: v, start: offset } })
    }

    pub fn staircase(start: f64, pieces: Vec<(f64, f64)>) -> Result<Self> {
        let mut last_t = 0.0;
        let mut last_v = start;
        for (i, &(t, v)) in pieces.iter().enumerate() {
            if !(t >= last_t) || (i > 0 && t <= last_t) {
                return Err(Error::Wall(format!("staircase breakpoints must increase strictly (piece {i})")));
            }
            if v < last_v {
                return Err(Error::Wall(format!("staircase values must be non-decreasing (piece {i})")));
            }
            last_t = t;
            last_v = v;
        }
        if start < 0.0 {
            return Err(Error::Wall("wall must start at or right of 0".into()));
        }
        Ok(Self { shape: WallShape::Staircase { start, pieces } })
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Wall("tabulated wall has no points".into()));
        }
        if points[0].0 != 0.0 {
            return Err(Error::Wall(format!("tabulated wall must start at t = 0, got {}", points[0].0)));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Wall(format!(
                    "time column not strictly increasing at row {} ({} after {})",
                    i + 2,
                    w[1].0,
                    w[0].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Wall(format!("wall value decreases at row {}", i + 2)));
            }
        }
        if points[0].1 < 0.0 {
            return Err(Error::Wall("wall must start at or right of 0".into()));
        }
        Ok(Self { shape: WallShape::Tabulated { points } })
    }

    /// Read a `t,value` CSV (header optional).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
        let mut points = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok());
            match (parse(0), parse(1)) {
                (Some(t), Some(v)) => points.push((t, v)),
                _ if i == 0 => continue,
                _ => return Err(Error::Wall(format!("row {} is not a `t,value` pair", i + 1))),
            }
        }
        Self::tabulated(points)
    }

    pub fn shape(&self) -> &WallShape {
        &self.shape
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self.shape, WallShape::Unbounded)
    }

    /// `f(t)`.
    pub fn value(&self, t: f64) -> f64 {
        match &self.shape {
            WallShape::Unbounded => f64::INFINITY,
            WallShape::Linear { offset, speed, start } => {
                if t <= 0.0 {
                    *start
                } else {
                    offset + speed * t
                }
            }
            WallShape::Staircase { start, pieces } => {
                let k = pieces.partition_point(|&(from, _)| from < t);
                if k == 0 {
                    *start
                } else {
                    pieces[k - 1].1
                }
            }
            WallShape::Tabulated { points } => {
                let k = points.partition_point(|&(x, _)| x <= t);
                if k == 0 {
                    points[0].1
                } else if k == points.len() {
                    points[k - 1].1
                } else {
                    let (a, fa) = points[k - 1];
                    let (b, fb) = points[k];
                    fa + (fb - fa) * (t - a) / (b - a)
                }
            }
        }
    }

    /// `floor(f(t))`, saturating.
    pub fn effective(&self, t: f64) -> i64 {
        let v = self.value(t);
        if v >= i64::MAX as f64 {
            i64::MAX
        } else {
            v.floor() as i64
        }
    }

    /// `f(0+)`.
    pub fn right_limit_at_zero(&self) -> f64 {
        match &self.shape {
            WallShape::Unbounded => f64::INFINITY,
            WallShape::Linear { offset, .. } => *offset,
            WallShape::Staircase { start, pieces } => match pieces.first() {
                Some(&(from, v)) if from == 0.0 => v,
                _ => *start,
            },
            WallShape::Tabulated { points } => points[0].1,
        }
    }

    /// `inf { t >= 0 : f(t) >= k }`, or `None` if the level is never reached.
    pub fn first_time_at_least(&self, k: i64) -> Option<f64> {
        let k = k as f64;
        match &self.shape {
            WallShape::Unbounded => Some(0.0),
            WallShape::Linear { offset, speed, start } => {
                if *start >= k || *offset >= k {
                    Some(0.0)
                } else if *speed > 0.0 {
                    Some((k - offset) / speed)
                } else {
                    None
                }
            }
            WallShape::Staircase { start, pieces } => {
                if *start >= k {
                    Some(0.0)
                } else {
                    pieces.iter().find(|&&(_, v)| v >= k).map(|&(from, _)| from)
                }
            }
            WallShape::Tabulated { points } => {
                if points[0].1 >= k {
                    return Some(0.0);
                }
                for w in points.windows(2) {
                    let ((a, fa), (b, fb)) = (w[0], w[1]);
                    if fb >= k {
                        return Some(a + (k - fa) / (fb - fa) * (b - a));
                    }
                }
                None
            }
        }
    }

    /// Reject walls that start away from the origin unless `allow_positive_start`.
    pub fn check_start(&self, allow_positive_start: bool) -> Result<()> {
        let f0 = self.value(0.0);
        if f0 < 0.0 || (!allow_positive_start && f0 != 0.0 && !self.is_unbounded()) {
            return Err(Error::Wall(format!("wall starts at f(0) = {f0}; a non-zero start needs the relaxation flag")));
        }
        Ok(())
    }
}

/// Time-reversed wall seen from level `s`: `b(t) = s - floor(f(T - t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierProfile {
    s: i64,
    horizon: f64,
    wall: WallProfile,
}

impl BarrierProfile {
    pub fn new(s: i64, horizon: f64, wall: WallProfile) -> Self {
        Self { s, horizon, wall }
    }

    pub fn s(&self) -> i64 {
        self.s
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn wall(&self) -> &WallProfile {
        &self.wall
    }

    /// `b(t)`; `i64::MIN` for an unbounded wall.
    pub fn level(&self, t: f64) -> i64 {
        let u = (self.horizon - t).max(0.0);
        let m = self.wall.effective(u);
        if m == i64::MAX {
            i64::MIN
        } else {
            self.s - m
        }
    }

    /// Intervals of constancy `[a_i, a_{i+1})` of `b` on `[0, T)`, as
    /// `(a_i, floor f(T - a_i))`, followed by the single point `(T, floor f(0))`.
    pub fn pieces(&self) -> Vec<(f64, i64)> {
        let t = self.horizon;
        if self.wall.is_unbounded() {
            return vec![];
        }
        let m0 = self.wall.right_limit_at_zero().floor() as i64;
        let mt = self.wall.effective(t);
        let mut out = vec![(0.0, mt)];
        for k in (m0 + 1..=mt).rev() {
            let u = self.wall.first_time_at_least(k).unwrap_or(t).min(t);
            out.push((t - u, k - 1));
        }
        out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        // merge equal starts, keeping the later (lower) level
        let mut merged: Vec<(f64, i64)> = Vec::new();
        for p in out {
            match merged.last_mut() {
                Some(last) if last.0 == p.0 => last.1 = last.1.min(p.1),
                _ => merged.push(p),
            }
        }
        merged.push((t, self.wall.effective(0.0)));
        merged
    }
}

/// Front particle held at or below `floor(f(t))`.
pub fn evolve_right_wall(
    config: &ParticleConfig,
    clocks: &ClockField,
    horizon: f64,
    wall: &WallProfile,
) -> Result<Trajectory> {
    if let Some(&front) = config.positions().first() {
        if front > wall.effective(0.0) {
            return Err(Error::Wall(format!("front particle at {front} starts beyond the wall")));
        }
    }
    evolve_with(config, clocks, 0.0, horizon, Constraint::Wall(wall))
}

/// Every jump attempt from a site at or left of `b(t)` is suppressed.
pub fn evolve_left_frozen(
    config: &ParticleConfig,
    clocks: &ClockField,
    barrier: &BarrierProfile,
) -> Result<Trajectory> {
    evolve_with(config, clocks, 0.0, barrier.horizon(), Constraint::Barrier(barrier))
}

/// `min_t (x_label(t) + floor f(T - t))` over `[0, T]`; the barrier from
/// level `s` is survived iff `s` is strictly below this value.
pub fn survival_threshold(traj: &Trajectory, label: i64, wall: &WallProfile, horizon: f64) -> i64 {
    let probe = BarrierProfile::new(0, horizon, wall.clone());
    probe
        .pieces()
        .into_iter()
        .map(|(a, m)| traj.position(label, a).saturating_add(m))
        .min()
        .unwrap_or(i64::MAX)
}

/// `x_label(t) > b(t)` for every `t` in `[0, T]`.
pub fn barrier_survival(traj: &Trajectory, label: i64, barrier: &BarrierProfile) -> bool {
    barrier.s() < survival_threshold(traj, label, barrier.wall(), barrier.horizon())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasep::{sweep, window_for};

    #[test]
    fn staircase_is_left_open_right_closed() {
        let w = WallProfile::staircase(0.0, vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(w.value(0.0), 0.0);
        assert_eq!(w.value(0.5), 1.0);
        assert_eq!(w.value(1.0), 1.0);
        assert_eq!(w.value(1.0001), 2.0);
        assert_eq!(w.first_time_at_least(2), Some(1.0));
        assert_eq!(w.first_time_at_least(3), None);
    }

    #[test]
    fn linear_wall_jumps_at_zero() {
        let w = WallProfile::linear(0.1, 0.5, 50.0).unwrap();
        assert_eq!(w.value(0.0), 0.0);
        assert_eq!(w.value(2.0), 6.0);
        assert_eq!(w.effective(1.9), 5);
        assert_eq!(w.first_time_at_least(5), Some(0.0));
        assert_eq!(w.first_time_at_least(7), Some(4.0));
        assert!(w.check_start(false).is_ok());
        assert!(WallProfile::affine(3.0, 0.5).unwrap().check_start(false).is_err());
        assert!(WallProfile::affine(3.0, 0.5).unwrap().check_start(true).is_ok());
    }

    #[test]
    fn tabulated_validation() {
        assert!(WallProfile::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(WallProfile::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(WallProfile::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]).is_err());
        let w = WallProfile::tabulated(vec![(0.0, 0.0), (2.0, 4.0)]).unwrap();
        assert_eq!(w.value(1.0), 2.0);
        assert_eq!(w.first_time_at_least(3), Some(1.5));
        assert_eq!(w.value(5.0), 4.0);
    }

    #[test]
    fn csv_wall_reads_and_validates() {
        let dir = std::env::temp_dir().join(format!("wallcsv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let good = dir.join("good.csv");
        std::fs::write(&good, "t,value\n0,0\n1,0.5\n2,2\n").unwrap();
        let w = WallProfile::from_csv(&good).unwrap();
        assert_eq!(w.value(1.5), 1.25);
        let bad = dir.join("bad.csv");
        std::fs::write(&bad, "t,value\n0,0\n1,0.5\n1,2\n").unwrap();
        let err = WallProfile::from_csv(&bad).unwrap_err().to_string();
        assert!(err.contains("strictly increasing"), "{err}");
    }

    #[test]
    fn barrier_levels_reverse_the_wall() {
        let w = WallProfile::staircase(0.0, vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        let b = BarrierProfile::new(3, 2.0, w);
        assert_eq!(b.level(0.0), 1);
        assert_eq!(b.level(0.5), 1);
        assert_eq!(b.level(1.5), 2);
        assert_eq!(b.level(2.0), 3);
        assert_eq!(b.pieces(), vec![(0.0, 2), (1.0, 1), (2.0, 0)]);
        let un = BarrierProfile::new(3, 2.0, WallProfile::unbounded());
        assert_eq!(un.level(1.0), i64::MIN);
    }

    #[test]
    fn linear_barrier_pieces_match_levels() {
        let w = WallProfile::linear(0.1, 0.5, 20.0).unwrap();
        let b = BarrierProfile::new(0, 20.0, w.clone());
        let p = b.pieces();
        for win in p.windows(2) {
            let mid = 0.5 * (win[0].0 + win[1].0);
            assert_eq!(-b.level(mid), win[0].1, "at {mid}");
        }
        assert_eq!(p.last().unwrap(), &(20.0, 0));
    }

    #[test]
    fn wall_cascade_matches_sweep() {
        let w = WallProfile::staircase(0.0, vec![(0.0, 1.0), (1.5, 2.0), (3.0, 4.0)]).unwrap();
        for seed in 0..40 {
            let cfg = ParticleConfig::step(5);
            let (lo, hi) = window_for(&cfg, 5.0);
            let clocks = ClockField::new(seed, lo, hi).unwrap();
            let a = evolve_right_wall(&cfg, &clocks, 5.0, &w).unwrap();
            let (b, log) = sweep(&cfg, &clocks, 0.0, 5.0, Constraint::Wall(&w)).unwrap();
            assert_eq!(a.final_config(), b.final_config());
            assert_eq!(a.event_log(), log);
            for t in [1.0, 2.0, 3.0, 4.0, 5.0] {
                assert!(a.position(1, t) <= w.effective(t));
            }
        }
    }

    #[test]
    fn barrier_cascade_matches_sweep() {
        let w = WallProfile::linear(0.1, 0.5, 6.0).unwrap();
        for seed in 0..40 {
            let cfg = ParticleConfig::step(5);
            let (lo, hi) = window_for(&cfg, 6.0);
            let clocks = ClockField::new(seed, lo, hi).unwrap();
            let b = BarrierProfile::new(-1, 6.0, w.clone());
            let a = evolve_left_frozen(&cfg, &clocks, &b).unwrap();
            let (s, log) = sweep(&cfg, &clocks, 0.0, 6.0, Constraint::Barrier(&b)).unwrap();
            assert_eq!(a.final_config(), s.final_config());
            assert_eq!(a.event_log(), log);
        }
    }

    #[test]
    fn unbounded_wall_equals_free_evolution() {
        let cfg = ParticleConfig::step(6);
        let (lo, hi) = window_for(&cfg, 8.0);
        let clocks = ClockField::new(5, lo, hi).unwrap();
        let free = crate::tasep::evolve(&cfg, &clocks, 0.0, 8.0).unwrap();
        let walled = evolve_right_wall(&cfg, &clocks, 8.0, &WallProfile::unbounded()).unwrap();
        let frozen = evolve_left_frozen(&cfg, &clocks, &BarrierProfile::new(0, 8.0, WallProfile::unbounded())).unwrap();
        assert_eq!(free.event_log(), walled.event_log());
        assert_eq!(free.event_log(), frozen.event_log());
    }

    #[test]
    fn left_frozen_dichotomy() {
        // survival => same trajectory; otherwise the final position is at most s
        let w = WallProfile::linear(0.1, 0.5, 10.0).unwrap();
        for seed in 0..200 {
            let n = 4;
            let cfg = ParticleConfig::step(n);
            let (lo, hi) = window_for(&cfg, 10.0);
            let clocks = ClockField::new(seed, lo, hi).unwrap();
            let x = crate::tasep::evolve(&cfg, &clocks, 0.0, 10.0).unwrap();
            for s in -3..6 {
                let b = BarrierProfile::new(s, 10.0, w.clone());
                let y = evolve_left_frozen(&cfg, &clocks, &b).unwrap();
                if barrier_survival(&x, n as i64, &b) {
                    assert_eq!(x.jump_times(n as i64), y.jump_times(n as i64));
                } else {
                    assert!(y.position(n as i64, 10.0) <= s);
                }
            }
        }
    }
}
