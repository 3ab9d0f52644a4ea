//! Single-species TASEP under the site-clock construction.
//!
//! A particle at `z` tries to jump to `z + 1` at every event of the clock of
//! site `z`; the attempt succeeds iff `z + 1` is empty (and no wall or barrier
//! forbids it). Particles are labeled right to left and keep their order.
//!
//! [`evolve_with`] solves the dynamics label by label: the jump times of
//! label `n` depend only on its own site clocks and on the jump times of
//! label `n - 1`. [`sweep`] replays every clock event of the window in the
//! global (time, site) order and serves as an independent reference.
//! [`sample_with`] runs the same solver with a private rate-1 clock per
//! particle; it has the same law but is not coupled to a [`ClockField`].

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clock::{key_max, ClockField, EventKey};
use crate::error::{Error, Result};
use crate::wall::{BarrierProfile, WallProfile};

/// Width of the band at the right edge of the clock window that particles
/// may not enter.
pub const GUARD: i64 = 5;

/// Labeled particle positions, strictly decreasing in the label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParticleConfig {
    first_label: i64,
    positions: Vec<i64>,
}

impl ParticleConfig {
    /// `positions[i]` is the position of label `first_label + i`.
    pub fn new(first_label: i64, positions: Vec<i64>) -> Result<Self> {
        if let Some(w) = positions.windows(2).find(|w| w[0] <= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "positions must be strictly decreasing in the label, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self { first_label, positions })
    }

    /// Step initial condition with labels `1..=n` at `0, -1, ..., -n + 1`.
    pub fn step(n: usize) -> Self {
        Self::step_at(0, n)
    }

    /// Labels `1..=n` packed to the left of (and including) `z`.
    pub fn step_at(z: i64, n: usize) -> Self {
        Self { first_label: 1, positions: (0..n as i64).map(|k| z - k).collect() }
    }

    /// Independent Bernoulli(`rho`) occupation of `[lo, hi]`, labeled so that
    /// `x_1 < 0 <= x_0`.
    pub fn bernoulli(rho: f64, lo: i64, hi: i64, seed: u64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::Domain(format!("density {rho} outside (0, 1]")));
        }
        if lo > hi {
            return Err(Error::Domain(format!("empty window [{lo}, {hi}]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut occ: Vec<i64> = Vec::new();
        for z in lo..=hi {
            if rho >= 1.0 || rng.gen::<f64>() < rho {
                occ.push(z);
            }
        }
        occ.reverse();
        let right = occ.iter().filter(|&&z| z >= 0).count() as i64;
        Ok(Self { first_label: 1 - right, positions: occ })
    }

    pub fn first_label(&self) -> i64 {
        self.first_label
    }

    pub fn last_label(&self) -> i64 {
        self.first_label + self.positions.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn position(&self, label: i64) -> Option<i64> {
        let i = label - self.first_label;
        (i >= 0).then(|| self.positions.get(i as usize).copied()).flatten()
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.positions.len() as i64).map(move |i| self.first_label + i)
    }

    /// Keep only labels in `lo..=hi`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        let a = (lo - self.first_label).max(0) as usize;
        let b = ((hi - self.first_label + 1).max(0) as usize).min(self.positions.len());
        let a = a.min(b);
        Self { first_label: self.first_label + a as i64, positions: self.positions[a..b].to_vec() }
    }
}

/// Extra rule applied on top of exclusion.
#[derive(Debug, Clone, Copy)]
pub enum Constraint<'a> {
    Free,
    /// The front particle may not exceed `floor(f(t))`.
    Wall(&'a WallProfile),
    /// A jump attempt from a site `<= b(t)` is suppressed.
    Barrier(&'a BarrierProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Jump,
    Suppressed,
    WallSuppressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoggedEvent {
    pub t: f64,
    pub site: i64,
    pub label: i64,
    pub kind: EventKind,
}

/// Evolution of a labeled configuration over `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    clocks: Option<ClockField>,
    t0: f64,
    t1: f64,
    first_label: i64,
    start: Vec<i64>,
    jumps: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Site clocks behind this trajectory; `None` for particle-clock samples.
    pub fn clocks(&self) -> Option<&ClockField> {
        self.clocks.as_ref()
    }

    pub(crate) fn site_clocks(&self) -> Result<&ClockField> {
        self.clocks.as_ref().ok_or_else(|| {
            Error::InvalidConfig("operation needs the site clocks; this trajectory was sampled with particle clocks".into())
        })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn first_label(&self) -> i64 {
        self.first_label
    }

    pub fn last_label(&self) -> i64 {
        self.first_label + self.start.len() as i64 - 1
    }

    pub fn has_label(&self, label: i64) -> bool {
        label >= self.first_label && label <= self.last_label()
    }

    fn idx(&self, label: i64) -> usize {
        assert!(self.has_label(label), "label {label} not tracked");
        (label - self.first_label) as usize
    }

    pub fn initial(&self) -> ParticleConfig {
        ParticleConfig { first_label: self.first_label, positions: self.start.clone() }
    }

    pub fn initial_position(&self, label: i64) -> i64 {
        self.start[self.idx(label)]
    }

    /// Jump times of `label`, ascending.
    pub fn jump_times(&self, label: i64) -> &[f64] {
        &self.jumps[self.idx(label)]
    }

    /// Position at time `t` (right-continuous).
    pub fn position(&self, label: i64, t: f64) -> i64 {
        let i = self.idx(label);
        self.start[i] + self.jumps[i].partition_point(|&e| e <= t) as i64
    }

    /// Position just before time `t`.
    pub fn position_before(&self, label: i64, t: f64) -> i64 {
        let i = self.idx(label);
        self.start[i] + self.jumps[i].partition_point(|&e| e < t) as i64
    }

    pub fn config_at(&self, t: f64) -> ParticleConfig {
        let positions = (0..self.start.len())
            .map(|i| self.start[i] + self.jumps[i].partition_point(|&e| e <= t) as i64)
            .collect();
        ParticleConfig { first_label: self.first_label, positions }
    }

    pub fn final_config(&self) -> ParticleConfig {
        self.config_at(self.t1)
    }

    pub fn total_jumps(&self) -> usize {
        self.jumps.iter().map(Vec::len).sum()
    }

    /// Time at which `label` leaves `site`, if it does so before the horizon.
    pub(crate) fn departure(&self, label: i64, site: i64) -> Option<f64> {
        let i = self.idx(label);
        let k = site - self.start[i];
        if k < 0 {
            return None;
        }
        self.jumps[i].get(k as usize).copied()
    }

    /// Time at which `label` arrives at `site` (`t0` for its initial site).
    pub(crate) fn arrival(&self, label: i64, site: i64) -> Option<f64> {
        let i = self.idx(label);
        let k = site - self.start[i];
        if k < 0 {
            None
        } else if k == 0 {
            Some(self.t0)
        } else {
            self.jumps[i].get(k as usize - 1).copied()
        }
    }

    /// Every clock event that hit an occupied site, in (time, site) order.
    ///
    /// A failed attempt is `Suppressed` when the site ahead holds the
    /// preceding label and `WallSuppressed` otherwise.
    pub fn event_log(&self) -> Vec<LoggedEvent> {
        let clocks = self.site_clocks().expect("event log");
        let mut out = Vec::new();
        let mut buf = Vec::new();
        for (i, js) in self.jumps.iter().enumerate() {
            let label = self.first_label + i as i64;
            let mut site = self.start[i];
            let mut arr = self.t0;
            for k in 0..=js.len() {
                let dep = js.get(k).copied();
                buf.clear();
                clocks.events_between(site, arr, dep.unwrap_or(self.t1), &mut buf);
                for &e in &buf {
                    if Some(e) == dep {
                        continue;
                    }
                    let blocked = i > 0 && self.position(label - 1, e) == site + 1;
                    let kind = if blocked { EventKind::Suppressed } else { EventKind::WallSuppressed };
                    out.push(LoggedEvent { t: e, site, label, kind });
                }
                if let Some(d) = dep {
                    out.push(LoggedEvent { t: d, site, label, kind: EventKind::Jump });
                    arr = d;
                    site += 1;
                }
            }
        }
        out.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap().then(a.site.cmp(&b.site)));
        out
    }

    /// Write the event log as JSON lines `{t, site, label, kind}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for ev in self.event_log() {
            serde_json::to_writer(&mut w, &ev)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Unconstrained evolution over `[t0, t1]`.
pub fn evolve(config: &ParticleConfig, clocks: &ClockField, t0: f64, t1: f64) -> Result<Trajectory> {
    evolve_with(config, clocks, t0, t1, Constraint::Free)
}

/// Evolution over `[t0, t1]`, solved label by label.
///
/// Labels ahead of `config.first_label()` are taken to be absent; for a
/// truncated infinite configuration the caller must include enough of them.
pub fn evolve_with(
    config: &ParticleConfig,
    clocks: &ClockField,
    t0: f64,
    t1: f64,
    constraint: Constraint<'_>,
) -> Result<Trajectory> {
    check_window(config, clocks)?;
    let (_, hi) = clocks.window();
    let jumps = cascade(config, t0, t1, constraint, Some(hi - GUARD), |_, site, ready| {
        clocks.next_after_unchecked(site, ready)
    })?;
    Ok(Trajectory { clocks: Some(*clocks), t0, t1, first_label: config.first_label, start: config.positions.clone(), jumps })
}

/// Same dynamics with an independent rate-1 clock carried by each particle.
///
/// Equal in law to [`evolve_with`] but not coupled to any [`ClockField`]:
/// after a particle becomes free to jump it waits an Exp(1) time.
pub fn sample_with<R: Rng>(
    config: &ParticleConfig,
    t0: f64,
    t1: f64,
    constraint: Constraint<'_>,
    rng: &mut R,
) -> Result<Trajectory> {
    let jumps = cascade(config, t0, t1, constraint, None, |_, _, ready| {
        let w: f64 = rng.sample(rand_distr::Exp1);
        ready.0 + w
    })?;
    Ok(Trajectory { clocks: None, t0, t1, first_label: config.first_label, start: config.positions.clone(), jumps })
}

/// Continue a trajectory with `extra` further labels behind its last one,
/// placed at `next_positions` (strictly decreasing, left of the last label).
pub fn extend_sampled<R: Rng>(
    traj: &mut Trajectory,
    next_positions: &[i64],
    constraint: Constraint<'_>,
    rng: &mut R,
) -> Result<()> {
    if traj.clocks.is_some() {
        return Err(Error::InvalidConfig("only particle-clock samples can be extended".into()));
    }
    let mut positions = vec![*traj.start.last().unwrap()];
    positions.extend_from_slice(next_positions);
    let cfg = ParticleConfig::new(traj.last_label(), positions)?;
    let seed_jumps = traj.jumps.last().unwrap().clone();
    let jumps = cascade_from(&cfg, Some(seed_jumps), traj.t0, traj.t1, constraint, None, |_, _, ready| {
        let w: f64 = rng.sample(rand_distr::Exp1);
        ready.0 + w
    })?;
    traj.start.extend_from_slice(next_positions);
    traj.jumps.extend(jumps.into_iter().skip(1));
    Ok(())
}

fn cascade<F>(
    config: &ParticleConfig,
    t0: f64,
    t1: f64,
    constraint: Constraint<'_>,
    limit: Option<i64>,
    attempt: F,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(usize, i64, EventKey) -> f64,
{
    cascade_from(config, None, t0, t1, constraint, limit, attempt)
}

/// Label-by-label solver. `attempt(i, site, ready)` returns the first jump
/// attempt of particle `i` at `site` strictly after `ready`. If `front` is
/// given, the first label's jump times are taken from it instead.
fn cascade_from<F>(
    config: &ParticleConfig,
    front: Option<Vec<f64>>,
    t0: f64,
    t1: f64,
    constraint: Constraint<'_>,
    limit: Option<i64>,
    mut attempt: F,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(usize, i64, EventKey) -> f64,
{
    let n = config.positions.len();
    let mut jumps: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut skip = 0;
    if let Some(f) = front {
        jumps.push(f);
        skip = 1;
    }
    for i in skip..n {
        let mut own = Vec::new();
        let mut pos = config.positions[i];
        let mut key: EventKey = (t0, i64::MIN);
        let (prev_start, prev): (i64, &[f64]) =
            if i > 0 { (config.positions[i - 1], &jumps[i - 1]) } else { (0, &[]) };
        let wall = match constraint {
            Constraint::Wall(w) if i == 0 => Some(w),
            _ => None,
        };
        loop {
            let target = pos + 1;
            let mut ready = key;
            if i > 0 {
                let m = target - prev_start;
                if m >= 0 {
                    match prev.get(m as usize) {
                        Some(&d) => ready = key_max(ready, (d, target)),
                        None => break,
                    }
                }
            }
            if let Some(w) = wall {
                match w.first_time_at_least(target) {
                    Some(tau) => ready = key_max(ready, (tau, i64::MIN)),
                    None => break,
                }
            }
            if ready.0 > t1 {
                break;
            }
            let mut e = attempt(i, pos, ready);
            if let Some(w) = wall {
                while e <= t1 && w.effective(e) < target {
                    e = attempt(i, pos, (e, pos));
                }
            }
            if e > t1 {
                break;
            }
            if let Constraint::Barrier(b) = constraint {
                if pos <= b.level(e) {
                    break;
                }
            }
            if let Some(lim) = limit {
                if target > lim {
                    return Err(Error::Truncation(format!(
                        "label {} reached site {target} inside the guard band (limit {lim})",
                        config.first_label + i as i64
                    )));
                }
            }
            own.push(e);
            key = (e, pos);
            pos = target;
        }
        jumps.push(own);
    }
    Ok(jumps)
}

fn check_window(config: &ParticleConfig, clocks: &ClockField) -> Result<()> {
    let (lo, hi) = clocks.window();
    if let (Some(&front), Some(&back)) = (config.positions.first(), config.positions.last()) {
        if back < lo || front > hi - GUARD {
            return Err(Error::Truncation(format!(
                "initial positions [{back}, {front}] not inside window [{lo}, {}]",
                hi - GUARD
            )));
        }
    }
    Ok(())
}

/// Reference evolution: process every clock event of the window in order.
///
/// Returns the trajectory together with the full event log.
pub fn sweep(
    config: &ParticleConfig,
    clocks: &ClockField,
    t0: f64,
    t1: f64,
    constraint: Constraint<'_>,
) -> Result<(Trajectory, Vec<LoggedEvent>)> {
    check_window(config, clocks)?;
    let (_, hi) = clocks.window();
    let mut occ: HashMap<i64, usize> =
        config.positions.iter().enumerate().map(|(i, &z)| (z, i)).collect();
    let mut jumps = vec![Vec::new(); config.positions.len()];
    let mut frozen = vec![false; config.positions.len()];
    let mut log = Vec::new();
    for (e, z) in clocks.merged_events(t0, t1) {
        let Some(&i) = occ.get(&z) else { continue };
        let label = config.first_label + i as i64;
        if occ.contains_key(&(z + 1)) {
            log.push(LoggedEvent { t: e, site: z, label, kind: EventKind::Suppressed });
            continue;
        }
        let walled = match constraint {
            Constraint::Free => false,
            Constraint::Wall(w) => i == 0 && w.effective(e) < z + 1,
            Constraint::Barrier(b) => {
                if z <= b.level(e) {
                    frozen[i] = true;
                }
                frozen[i]
            }
        };
        if walled {
            log.push(LoggedEvent { t: e, site: z, label, kind: EventKind::WallSuppressed });
            continue;
        }
        if z + 1 > hi - GUARD {
            return Err(Error::Truncation(format!("label {label} reached the guard band")));
        }
        occ.remove(&z);
        occ.insert(z + 1, i);
        jumps[i].push(e);
        log.push(LoggedEvent { t: e, site: z, label, kind: EventKind::Jump });
    }
    let traj = Trajectory {
        clocks: Some(*clocks),
        t0,
        t1,
        first_label: config.first_label,
        start: config.positions.clone(),
        jumps,
    };
    Ok((traj, log))
}

/// Clock window large enough for `config` over a horizon of length `dt`:
/// `[back - 1, front + dt + 10 sqrt(dt) + 20]`.
pub fn window_for(config: &ParticleConfig, dt: f64) -> (i64, i64) {
    let front = config.positions.first().copied().unwrap_or(0);
    let back = config.positions.last().copied().unwrap_or(0);
    (back - 1, front + (dt + 10.0 * dt.sqrt()).ceil() as i64 + 20 + GUARD)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clocks_for(cfg: &ParticleConfig, seed: u64, t: f64) -> ClockField {
        let (lo, hi) = window_for(cfg, t);
        ClockField::new(seed, lo, hi).unwrap()
    }

    #[test]
    fn step_labels_and_positions() {
        let c = ParticleConfig::step(3);
        assert_eq!(c.positions(), &[0, -1, -2]);
        assert_eq!(c.position(1), Some(0));
        assert_eq!(c.position(3), Some(-2));
        assert_eq!(c.position(4), None);
    }

    #[test]
    fn bernoulli_labeling() {
        for seed in 0..50 {
            let c = ParticleConfig::bernoulli(0.5, -20, 20, seed).unwrap();
            if let Some(x1) = c.position(1) {
                assert!(x1 < 0);
            }
            if let Some(x0) = c.position(0) {
                assert!(x0 >= 0);
            }
        }
        let full = ParticleConfig::bernoulli(1.0, -5, 5, 1).unwrap();
        assert_eq!(full.position(0), Some(0));
        assert_eq!(full.position(1), Some(-1));
        assert!(ParticleConfig::bernoulli(0.0, 0, 1, 1).is_err());
    }

    #[test]
    fn rejects_unordered_positions() {
        assert!(ParticleConfig::new(1, vec![0, 0]).is_err());
        assert!(ParticleConfig::new(1, vec![-1, 2]).is_err());
    }

    #[test]
    fn single_particle_follows_its_clock() {
        let cfg = ParticleConfig::step(1);
        let clocks = clocks_for(&cfg, 4, 10.0);
        let tr = evolve(&cfg, &clocks, 0.0, 10.0).unwrap();
        let mut z = 0;
        let mut t = 0.0;
        let mut expect = Vec::new();
        loop {
            let e = clocks.next_after(z, (t, i64::MIN)).unwrap();
            if e > 10.0 {
                break;
            }
            expect.push(e);
            t = e;
            z += 1;
        }
        assert_eq!(tr.jump_times(1), &expect[..]);
    }

    #[test]
    fn cascade_matches_sweep() {
        for seed in 0..40 {
            let cfg = ParticleConfig::step(8);
            let clocks = clocks_for(&cfg, seed, 6.0);
            let a = evolve(&cfg, &clocks, 0.0, 6.0).unwrap();
            let (b, log) = sweep(&cfg, &clocks, 0.0, 6.0, Constraint::Free).unwrap();
            for l in 1..=8 {
                assert_eq!(a.jump_times(l), b.jump_times(l));
            }
            assert_eq!(a.event_log(), log);
        }
    }

    #[test]
    fn cascade_matches_sweep_bernoulli_and_offset_start() {
        for seed in 0..30 {
            let cfg = ParticleConfig::bernoulli(0.6, -15, 15, seed).unwrap();
            let clocks = clocks_for(&cfg, seed + 100, 8.0);
            let a = evolve(&cfg, &clocks, 1.5, 8.0).unwrap();
            let (b, log) = sweep(&cfg, &clocks, 1.5, 8.0, Constraint::Free).unwrap();
            assert_eq!(a.final_config(), b.final_config());
            assert_eq!(a.event_log(), log);
        }
    }

    #[test]
    fn suppressed_events_are_blocked_by_the_predecessor() {
        let cfg = ParticleConfig::step(6);
        let clocks = clocks_for(&cfg, 9, 5.0);
        let tr = evolve(&cfg, &clocks, 0.0, 5.0).unwrap();
        for ev in tr.event_log() {
            if ev.kind == EventKind::Suppressed {
                assert_eq!(tr.position_before(ev.label - 1, ev.t), ev.site + 1);
            }
        }
    }

    #[test]
    fn replaying_the_log_reproduces_the_final_configuration() {
        let cfg = ParticleConfig::step(10);
        let clocks = clocks_for(&cfg, 21, 7.0);
        let tr = evolve(&cfg, &clocks, 0.0, 7.0).unwrap();
        let mut pos: HashMap<i64, i64> = cfg.labels().map(|l| (l, cfg.position(l).unwrap())).collect();
        for ev in tr.event_log() {
            if ev.kind == EventKind::Jump {
                let p = pos.get_mut(&ev.label).unwrap();
                assert_eq!(*p, ev.site);
                *p += 1;
            }
        }
        let fin = tr.final_config();
        for l in cfg.labels() {
            assert_eq!(fin.position(l), Some(pos[&l]));
        }
    }

    #[test]
    fn extra_labels_behind_do_not_change_earlier_ones() {
        let small = ParticleConfig::step(5);
        let big = ParticleConfig::step(12);
        let clocks = ClockField::new(3, -20, 60).unwrap();
        let a = evolve(&small, &clocks, 0.0, 10.0).unwrap();
        let b = evolve(&big, &clocks, 0.0, 10.0).unwrap();
        for l in 1..=5 {
            assert_eq!(a.jump_times(l), b.jump_times(l));
        }
    }

    #[test]
    fn guard_band_violation_is_reported() {
        let cfg = ParticleConfig::step(1);
        let clocks = ClockField::new(1, -2, 8).unwrap();
        assert!(matches!(evolve(&cfg, &clocks, 0.0, 50.0), Err(Error::Truncation(_))));
    }

    #[test]
    fn jsonl_has_one_object_per_line() {
        let cfg = ParticleConfig::step(3);
        let clocks = clocks_for(&cfg, 2, 3.0);
        let tr = evolve(&cfg, &clocks, 0.0, 3.0).unwrap();
        let mut buf = Vec::new();
        tr.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let kind = v["kind"].as_str().unwrap();
            assert!(["jump", "suppressed", "wall-suppressed"].contains(&kind));
        }
    }
}
