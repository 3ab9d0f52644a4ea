//! Backwards label processes and the paths they trace.
//!
//! Starting from label `N` at time `t` and running time backwards, the label
//! drops by one at each time its particle had a jump attempt blocked by the
//! particle ahead. The path follows the position of the current label.

use serde::Serialize;

use crate::clock::ClockField;
use crate::error::{Error, Result};
use crate::tasep::{evolve, ParticleConfig, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardsPath {
    label: i64,
    time: f64,
    start: f64,
    /// Label-change times, descending.
    changes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathPoint {
    pub u: f64,
    pub label: i64,
    pub x: i64,
}

/// Latest time strictly before `u` at which `label` was blocked by `label - 1`.
fn last_suppression(traj: &Trajectory, clocks: &ClockField, label: i64, u: f64) -> Option<f64> {
    if !traj.has_label(label - 1) {
        return None;
    }
    let t0 = traj.span().0;
    let mut z = traj.position_before(label, u);
    let mut hi = u;
    loop {
        let arr = traj.arrival(label, z).expect("sojourn site");
        if let Some(a1) = traj.arrival(label - 1, z + 1) {
            let d1 = traj.departure(label - 1, z + 1).unwrap_or(f64::INFINITY);
            let lo = arr.max(a1);
            let top = hi.min(d1);
            if top > lo {
                if let Some(e) = clocks.prev_before_unchecked(z, top, lo) {
                    return Some(e);
                }
            }
        }
        if arr <= t0 {
            return None;
        }
        hi = arr;
        z -= 1;
    }
}

/// Backwards path of `label` from time `t`.
pub fn build_backwards(traj: &Trajectory, label: i64, t: f64) -> Result<BackwardsPath> {
    let clocks = traj.site_clocks()?;
    let (t0, t1) = traj.span();
    if !traj.has_label(label) {
        return Err(Error::Truncation(format!(
            "label {label} outside tracked range [{}, {}]",
            traj.first_label(),
            traj.last_label()
        )));
    }
    if t < t0 || t > t1 {
        return Err(Error::Domain(format!("time {t} outside trajectory span [{t0}, {t1}]")));
    }
    let mut changes = Vec::new();
    let mut n = label;
    let mut u = t;
    while let Some(e) = last_suppression(traj, clocks, n, u) {
        changes.push(e);
        n -= 1;
        u = e;
    }
    Ok(BackwardsPath { label, time: t, start: t0, changes })
}

impl BackwardsPath {
    pub fn anchor(&self) -> (i64, f64) {
        (self.label, self.time)
    }

    pub fn change_times(&self) -> &[f64] {
        &self.changes
    }

    /// `N(t↓u)` for `u` in `[start, t]`.
    pub fn label_at(&self, u: f64) -> i64 {
        // changes are descending; count those >= u
        let k = self.changes.partition_point(|&c| c >= u);
        self.label - k as i64
    }

    pub fn end_label(&self) -> i64 {
        self.label - self.changes.len() as i64
    }

    pub fn position_at(&self, traj: &Trajectory, u: f64) -> i64 {
        traj.position(self.label_at(u), u)
    }

    pub fn end_position(&self, traj: &Trajectory) -> i64 {
        self.position_at(traj, self.start)
    }

    /// Anchor, each label change, and the terminal point at the start time.
    pub fn points(&self, traj: &Trajectory) -> Vec<PathPoint> {
        let mut out = vec![PathPoint { u: self.time, label: self.label, x: traj.position(self.label, self.time) }];
        for (k, &c) in self.changes.iter().enumerate() {
            let label = self.label - k as i64 - 1;
            out.push(PathPoint { u: c, label, x: traj.position(label, c) });
        }
        let label = self.end_label();
        out.push(PathPoint { u: self.start, label, x: traj.position(label, self.start) });
        out
    }

    /// Times in `[start, upto]` where the path position may change.
    pub fn breakpoints(&self, traj: &Trajectory, upto: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut hi = self.time;
        for k in 0..=self.changes.len() {
            let lo = self.changes.get(k).copied().unwrap_or(self.start);
            let label = self.label - k as i64;
            let js = traj.jump_times(label);
            let a = js.partition_point(|&e| e <= lo);
            let b = js.partition_point(|&e| e <= hi);
            out.extend(js[a..b].iter().copied().filter(|&e| e <= upto));
            if lo <= upto && k < self.changes.len() {
                out.push(lo);
            }
            hi = lo;
        }
        out.push(self.start);
        out.push(upto.min(self.time));
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// Whether every step of the path has size one.
    pub fn is_regular(&self, traj: &Trajectory) -> bool {
        let bp = self.breakpoints(traj, self.time);
        let mut last: Option<i64> = None;
        for w in bp.windows(2) {
            for u in [w[0], 0.5 * (w[0] + w[1])] {
                let x = self.position_at(traj, u);
                if let Some(p) = last {
                    if (x - p).abs() > 1 {
                        return false;
                    }
                }
                last = Some(x);
            }
        }
        true
    }
}

/// Earliest time in `[start, upto]` at which the two paths share a position.
/// Positions are read after any jump at that instant and labels after any
/// change, so paths swapping sides at one clock ring count as meeting.
pub fn paths_meet(
    a: (&Trajectory, &BackwardsPath),
    b: (&Trajectory, &BackwardsPath),
    upto: f64,
) -> Option<f64> {
    let mut pts = a.1.breakpoints(a.0, upto);
    pts.extend(b.1.breakpoints(b.0, upto));
    pts.retain(|&u| u <= upto);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let at = |u: f64| a.1.position_at(a.0, u) == b.1.position_at(b.0, u);
    for (i, &u) in pts.iter().enumerate() {
        if at(u) {
            return Some(u);
        }
        if let Some(&v) = pts.get(i + 1) {
            let m = 0.5 * (u + v);
            if at(m) {
                return Some(m);
            }
        }
    }
    None
}

/// Step configuration of `count` particles with front at `x` at time `tau`,
/// replayed on the same clocks until `t`.
pub fn replay_step(clocks: &ClockField, x: i64, count: usize, tau: f64, t: f64) -> Result<Trajectory> {
    evolve(&ParticleConfig::step_at(x, count), clocks, tau, t)
}

/// Reset to a step at the path position at time `tau` and replay. Equals
/// `x_N(t)`.
pub fn reset_and_replay(traj: &Trajectory, path: &BackwardsPath, tau: f64) -> Result<i64> {
    let (label, t) = path.anchor();
    let n_tau = path.label_at(tau);
    let x_star = path.position_at(traj, tau);
    let k = (label - n_tau + 1) as usize;
    let rep = replay_step(traj.site_clocks()?, x_star, k, tau, t)?;
    Ok(rep.position(k as i64, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct IdentityAudit {
    pub checks: u64,
    /// Reset at the path position misses `x_N(t)`.
    pub reset: u64,
    /// Restart from another label `n <= N` lands left of `x_N(t)`.
    pub other_start: u64,
    /// A label beyond the path label overtakes its replay.
    pub replay_bound: u64,
    pub irregular: u64,
}

impl IdentityAudit {
    pub fn merge(&mut self, o: &IdentityAudit) {
        self.checks += o.checks;
        self.reset += o.reset;
        self.other_start += o.other_start;
        self.replay_bound += o.replay_bound;
        self.irregular += o.irregular;
    }

    pub fn violations(&self) -> u64 {
        self.reset + self.other_start + self.replay_bound + self.irregular
    }
}

/// Check the reset identity, both inequalities and path regularity for
/// `label` at time `t` at every reset time in `taus`. `others` are the labels
/// used in the inequalities.
pub fn audit_identities(
    traj: &Trajectory,
    label: i64,
    t: f64,
    taus: &[f64],
    others: &[i64],
) -> Result<IdentityAudit> {
    let clocks = traj.site_clocks()?;
    let path = build_backwards(traj, label, t)?;
    let x_n = traj.position(label, t);
    let mut out = IdentityAudit::default();
    if !path.is_regular(traj) {
        out.irregular += 1;
    }
    for &tau in taus {
        let n_tau = path.label_at(tau);
        let x_star = path.position_at(traj, tau);
        // reset identity and, on the same replay, the bound for labels beyond N
        let deepest = others.iter().copied().filter(|&n| n >= n_tau).max().unwrap_or(label).max(label);
        let k = (deepest - n_tau + 1) as usize;
        let rep = replay_step(clocks, x_star, k, tau, t)?;
        out.checks += 1;
        if rep.position(label - n_tau + 1, t) != x_n {
            out.reset += 1;
        }
        for &n in others {
            if n >= n_tau && traj.has_label(n) {
                out.checks += 1;
                if traj.position(n, t) > rep.position(n - n_tau + 1, t) {
                    out.replay_bound += 1;
                }
            }
            if n <= label && traj.has_label(n) {
                let x = traj.position(n, tau);
                let rep2 = replay_step(clocks, x, (label - n + 1) as usize, tau, t)?;
                out.checks += 1;
                if x_n > rep2.position(label - n + 1, t) {
                    out.other_start += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Left and right modifications of an initial condition, split at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinDecomposition {
    pub x: i64,
    pub left: i64,
    /// `None` when the label starts strictly right of the origin.
    pub right: Option<i64>,
    pub path_end: i64,
}

impl MinDecomposition {
    pub fn min_holds(&self) -> bool {
        self.x == self.right.map_or(self.left, |r| r.min(self.left))
    }

    /// The branch picked by the sign of the path end attains the minimum.
    pub fn branch_holds(&self) -> bool {
        if self.path_end <= 0 {
            self.right == Some(self.x)
        } else {
            self.left == self.x
        }
    }

    /// Strict `right > left` forces the path to end strictly right of 0.
    pub fn inclusion_holds(&self) -> bool {
        match self.right {
            Some(r) if r > self.left => self.path_end > 0,
            _ => true,
        }
    }
}

/// `right`: particles strictly right of 0 removed. `left`: particles weakly
/// left of 0 packed into a step ending at 0. Labels are kept.
pub fn split_at_origin(config: &ParticleConfig) -> (ParticleConfig, Option<ParticleConfig>) {
    let pos = config.positions();
    let k = pos.iter().take_while(|&&x| x > 0).count();
    let mut left = pos[..k].to_vec();
    left.extend((0..(pos.len() - k) as i64).map(|j| -j));
    let left = ParticleConfig::new(config.first_label(), left).expect("packed step keeps order");
    let right = (k < pos.len())
        .then(|| ParticleConfig::new(config.first_label() + k as i64, pos[k..].to_vec()).expect("suffix keeps order"));
    (left, right)
}

pub fn min_decomposition(traj: &Trajectory, label: i64, t: f64) -> Result<MinDecomposition> {
    let clocks = traj.site_clocks()?;
    let (t0, _) = traj.span();
    let init = traj.initial().restrict(traj.first_label(), label);
    let (left_cfg, right_cfg) = split_at_origin(&init);
    let left = evolve(&left_cfg, clocks, t0, t)?.position(label, t);
    let right = match right_cfg {
        Some(c) if c.position(label).is_some() => Some(evolve(&c, clocks, t0, t)?.position(label, t)),
        _ => None,
    };
    let path = build_backwards(traj, label, t)?;
    Ok(MinDecomposition { x: traj.position(label, t), left, right, path_end: path.end_position(traj) })
}

/// Crossing event for a lower companion `lower` (label `m` anchored at
/// `t1`) against `x` (label `n` anchored at `t2`). Requires
/// `lower_m(t1) <= x_n(t1)`.
pub fn crossing_event(x: &Trajectory, lower: &Trajectory, n: i64, m: i64, t1: f64, t2: f64) -> Result<bool> {
    if lower.position(m, t1) > x.position(n, t1) {
        return Err(Error::Contract(format!("companion label {m} starts right of label {n} at time {t1}")));
    }
    let pn = build_backwards(x, n, t2)?;
    let pm = build_backwards(lower, m, t1)?;
    Ok(paths_meet((x, &pn), (lower, &pm), t1).is_some())
}

/// Crossing event for an upper companion `upper` (label `p` anchored at
/// `t2`) against `x` (label `n` anchored at `t1`). Requires
/// `x_n(t1) <= upper_p(t1)`.
pub fn crossing_event_upper(x: &Trajectory, upper: &Trajectory, n: i64, p: i64, t1: f64, t2: f64) -> Result<bool> {
    if x.position(n, t1) > upper.position(p, t1) {
        return Err(Error::Contract(format!("label {n} starts right of companion label {p} at time {t1}")));
    }
    let pn = build_backwards(x, n, t1)?;
    let pp = build_backwards(upper, p, t2)?;
    Ok(paths_meet((x, &pn), (upper, &pp), t1).is_some())
}

/// Smallest label at or left of `site` at time `t`.
pub fn first_label_at_or_left(traj: &Trajectory, site: i64, t: f64) -> Option<i64> {
    (traj.first_label()..=traj.last_label()).find(|&l| traj.position(l, t) <= site)
}

/// Largest label at or right of `site` at time `t`.
pub fn last_label_at_or_right(traj: &Trajectory, site: i64, t: f64) -> Option<i64> {
    (traj.first_label()..=traj.last_label()).rev().find(|&l| traj.position(l, t) >= site)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SandwichReport {
    pub lower_event: bool,
    pub upper_event: bool,
    pub pairs: u64,
    pub violations: u64,
    /// Violation on the outer pair `(t, big_t)`.
    pub outer_violation: bool,
    /// First violating pair with increments `(lower, x, upper)`.
    pub first_violation: Option<(f64, f64, [i64; 3])>,
}

impl SandwichReport {
    pub fn joint(&self) -> bool {
        self.lower_event && self.upper_event
    }
}

/// Increment ordering between a lower companion (label `m`), `x` (label
/// `n`) and an upper companion (label `p`) over all pairs of `grid`, checked
/// only when both crossing events on `[t, big_t]` hold.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_check(
    x: &Trajectory,
    lower: &Trajectory,
    upper: &Trajectory,
    n: i64,
    m: i64,
    p: i64,
    t: f64,
    big_t: f64,
    grid: &[f64],
) -> Result<SandwichReport> {
    let mut r = SandwichReport {
        lower_event: crossing_event(x, lower, n, m, t, big_t)?,
        upper_event: crossing_event_upper(x, upper, n, p, t, big_t)?,
        ..Default::default()
    };
    if !r.joint() {
        return Ok(r);
    }
    let incr = |tr: &Trajectory, l: i64| tr.position(l, big_t) - tr.position(l, t);
    r.outer_violation = incr(lower, m) > incr(x, n) || incr(x, n) > incr(upper, p);
    for (i, &a) in grid.iter().enumerate() {
        for &b in &grid[i + 1..] {
            let dx = x.position(n, b) - x.position(n, a);
            let dl = lower.position(m, b) - lower.position(m, a);
            let du = upper.position(p, b) - upper.position(p, a);
            r.pairs += 1;
            if dl > dx || dx > du {
                r.violations += 1;
                r.first_violation.get_or_insert((a, b, [dl, dx, du]));
            }
        }
    }
    Ok(r)
}

/// Whether the lower crossing event on `[t, big_t]` implies the one on every
/// sampled pair `t <= t1 < t2 <= big_t`; returns the number of failures.
pub fn event_inclusion_check(
    x: &Trajectory,
    lower: &Trajectory,
    n: i64,
    m: i64,
    t: f64,
    big_t: f64,
    pairs: &[(f64, f64)],
) -> Result<u64> {
    if !crossing_event(x, lower, n, m, t, big_t)? {
        return Ok(0);
    }
    let mut fails = 0;
    for &(t1, t2) in pairs {
        let ok = lower.position(m, t1) <= x.position(n, t1) && crossing_event(x, lower, n, m, t1, t2)?;
        if !ok {
            fails += 1;
        }
    }
    Ok(fails)
}

/// Whether the path from `(label, u)` stays weakly left of the path from
/// `(label, big_t)` on `[start, u]`.
pub fn paths_ordered(traj: &Trajectory, label: i64, u: f64, big_t: f64) -> Result<bool> {
    let a = build_backwards(traj, label, u)?;
    let b = build_backwards(traj, label, big_t)?;
    let mut pts = a.breakpoints(traj, u);
    pts.extend(b.breakpoints(traj, u));
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    for (i, &s) in pts.iter().enumerate() {
        let mut probe = vec![s];
        if let Some(&v) = pts.get(i + 1) {
            probe.push(0.5 * (s + v));
        }
        for q in probe {
            if a.position_at(traj, q) > b.position_at(traj, q) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
