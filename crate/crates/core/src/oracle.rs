//! Exact transient laws of small exclusion systems, computed by
//! uniformization of the finite Markov chain segment by segment.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::colored::{Color, ColoredConfig, WallRule};
use crate::error::{Error, Result};
use crate::wall::{BarrierProfile, WallProfile};

pub const DEFAULT_CAPACITY: usize = 200_000;
/// Poisson tail dropped per uniformization segment.
pub const DEFAULT_TAIL: f64 = 1e-15;

/// Rate-one moves out of every state; `None` targets leave the state space.
struct Generator {
    moves: Vec<Vec<Option<usize>>>,
}

/// Mass of a sub-probability vector plus bookkeeping of what was lost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transient {
    pub probs: Vec<f64>,
    /// Mass carried out of the window.
    pub leaked: f64,
    /// Poisson tail mass dropped by uniformization.
    pub tail: f64,
}

impl Transient {
    pub fn truncation_mass(&self) -> f64 {
        self.leaked + self.tail
    }
}

/// Poisson(`mean`) weights until the remaining tail is below `tol`.
fn poisson_weights(mean: f64, tol: f64) -> (Vec<f64>, f64) {
    let mut w = vec![(-mean).exp()];
    let mut k = 0usize;
    loop {
        let p = *w.last().unwrap();
        let kf = (k + 1) as f64;
        if kf > mean {
            // geometric bound on the remaining tail
            let ratio = mean / kf;
            let bound = p * ratio / (1.0 - ratio);
            if bound < tol {
                return (w, bound);
            }
        }
        w.push(p * mean / kf);
        k += 1;
    }
}

/// Advance `v` over a time `dt` under `allowed` moves. Leaked mass is
/// added to `leaked`; returns the dropped Poisson tail.
fn uniformize<F>(g: &Generator, v: &mut [f64], dt: f64, allowed: F, leaked: &mut f64, tol: f64) -> f64
where
    F: Fn(usize, usize) -> bool,
{
    if dt <= 0.0 {
        return 0.0;
    }
    let lambda = g.moves.iter().map(Vec::len).max().unwrap_or(0).max(1) as f64;
    let (weights, tail) = poisson_weights(lambda * dt, tol);
    let mut acc = vec![0.0; v.len()];
    let mut cur = v.to_vec();
    let mut cur_leak = 0.0;
    let mut out_leak = 0.0;
    let mut next = vec![0.0; v.len()];
    for (k, &w) in weights.iter().enumerate() {
        for (a, c) in acc.iter_mut().zip(&cur) {
            *a += w * c;
        }
        out_leak += w * cur_leak;
        if k + 1 == weights.len() {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for (s, &p) in cur.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let q = p / lambda;
            let mut stay = p;
            for (i, m) in g.moves[s].iter().enumerate() {
                if !allowed(s, i) {
                    continue;
                }
                stay -= q;
                match m {
                    Some(t) => next[*t] += q,
                    None => cur_leak += q,
                }
            }
            next[s] += stay;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    v.copy_from_slice(&acc);
    *leaked += out_leak;
    tail
}

/// Constant-level segments `[start_i, start_{i+1})` of `floor f` on `[0, T]`.
pub fn wall_segments(wall: &WallProfile, horizon: f64) -> Vec<(f64, i64)> {
    if wall.is_unbounded() {
        return vec![(0.0, i64::MAX)];
    }
    let m0 = wall.right_limit_at_zero().floor() as i64;
    let mt = wall.effective(horizon);
    let mut out = vec![(0.0, m0)];
    for k in m0 + 1..=mt {
        if let Some(u) = wall.first_time_at_least(k) {
            if u < horizon {
                out.push((u, k));
            }
        }
    }
    let mut merged: Vec<(f64, i64)> = Vec::new();
    for p in out {
        match merged.last_mut() {
            Some(last) if last.0 == p.0 => last.1 = last.1.max(p.1),
            _ => merged.push(p),
        }
    }
    merged
}

/// `n` labeled particles on `[lo, hi]`.
pub struct SpeciesChain {
    n: usize,
    lo: i64,
    hi: i64,
    states: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    gen: Generator,
    tail_tol: f64,
}

fn binomial(n: u64, k: u64) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

impl SpeciesChain {
    pub fn new(n: usize, lo: i64, hi: i64, capacity: usize) -> Result<Self> {
        if n == 0 || hi < lo + n as i64 - 1 {
            return Err(Error::InvalidConfig(format!("{n} particles do not fit in [{lo}, {hi}]")));
        }
        let count = binomial((hi - lo + 1) as u64, n as u64);
        if count > capacity as u128 {
            return Err(Error::Capacity { states: count.min(usize::MAX as u128) as usize, limit: capacity });
        }
        let mut states = Vec::with_capacity(count as usize);
        let mut cur = Vec::with_capacity(n);
        fn rec(cur: &mut Vec<i64>, n: usize, lo: i64, top: i64, out: &mut Vec<Vec<i64>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            let left = (n - cur.len() - 1) as i64;
            let mut z = top;
            while z - left >= lo {
                cur.push(z);
                rec(cur, n, lo, z - 1, out);
                cur.pop();
                z -= 1;
            }
        }
        rec(&mut cur, n, lo, hi, &mut states);
        let index: HashMap<Vec<i64>, usize> = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let moves = states
            .iter()
            .map(|s| {
                let mut m = Vec::with_capacity(n);
                for i in 0..n {
                    let target = s[i] + 1;
                    if i > 0 && s[i - 1] == target {
                        continue;
                    }
                    if target > hi {
                        m.push(None);
                    } else {
                        let mut t = s.clone();
                        t[i] = target;
                        m.push(Some(index[&t]));
                    }
                }
                m
            })
            .collect();
        Ok(Self { n, lo, hi, states, index, gen: Generator { moves }, tail_tol: DEFAULT_TAIL })
    }

    /// Window wide enough that the front of a step at 0 leaves it with
    /// probability below `1e-14` by time `horizon`.
    pub fn for_step(n: usize, horizon: f64, capacity: usize) -> Result<Self> {
        let (w, _) = poisson_weights(horizon, 1e-14);
        Self::new(n, -(n as i64) + 1, w.len() as i64 + 1, capacity)
    }

    pub fn with_tail(mut self, tol: f64) -> Self {
        self.tail_tol = tol;
        self
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn states(&self) -> &[Vec<i64>] {
        &self.states
    }

    pub fn index_of(&self, positions: &[i64]) -> Result<usize> {
        self.index
            .get(positions)
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("{positions:?} is not a state of the chain")))
    }

    /// Point mass at `positions`.
    pub fn delta(&self, positions: &[i64]) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.len()];
        v[self.index_of(positions)?] = 1.0;
        Ok(v)
    }

    /// Law at `horizon` with the front particle held at or below `floor f`.
    pub fn transient(&self, init: &[i64], wall: &WallProfile, horizon: f64) -> Result<Transient> {
        let mut v = self.delta(init)?;
        if init[0] > wall.effective(0.0) {
            return Err(Error::Wall(format!("front particle at {} starts beyond the wall", init[0])));
        }
        let segs = wall_segments(wall, horizon);
        let mut leaked = 0.0;
        let mut tail = 0.0;
        for (k, &(a, level)) in segs.iter().enumerate() {
            let b = segs.get(k + 1).map_or(horizon, |s| s.0);
            let states = &self.states;
            let gen = &self.gen;
            let allowed = |s: usize, i: usize| match gen.moves[s][i] {
                Some(t) => states[t][0] <= level,
                None => level == i64::MAX || states[s][0] < level,
            };
            tail += uniformize(&self.gen, &mut v, b - a, allowed, &mut leaked, self.tail_tol);
        }
        Ok(Transient { probs: v, leaked, tail })
    }

    /// Probability that label `label` (1-based) stays strictly above the
    /// barrier at every time in `[0, T]`, for the unconstrained chain.
    /// With `final_level`, additionally require `x(T) > final_level`.
    pub fn survival(
        &self,
        init: &[i64],
        label: usize,
        barrier: &BarrierProfile,
        final_level: Option<i64>,
    ) -> Result<(f64, Transient)> {
        if label == 0 || label > self.n {
            return Err(Error::InvalidConfig(format!("label {label} outside 1..={}", self.n)));
        }
        let horizon = barrier.horizon();
        let mut v = self.delta(init)?;
        let mut leaked = 0.0;
        let mut tail = 0.0;
        let pieces = barrier.pieces();
        let kill = |v: &mut [f64], level: i64| {
            for (p, s) in v.iter_mut().zip(&self.states) {
                if s[label - 1] <= level {
                    *p = 0.0;
                }
            }
        };
        let mut t = 0.0;
        for &(a, m) in &pieces {
            tail += uniformize(&self.gen, &mut v, a - t, |_, _| true, &mut leaked, self.tail_tol);
            t = a;
            kill(&mut v, barrier.s() - m);
        }
        if pieces.is_empty() {
            tail += uniformize(&self.gen, &mut v, horizon, |_, _| true, &mut leaked, self.tail_tol);
        }
        if let Some(level) = final_level {
            kill(&mut v, level);
        }
        let surv = v.iter().sum();
        Ok((surv, Transient { probs: v, leaked, tail }))
    }

    /// `P(x_label > s)` under a law of this chain.
    pub fn tail_prob(&self, probs: &[f64], label: usize, s: i64) -> f64 {
        probs.iter().zip(&self.states).filter(|(_, st)| st[label - 1] > s).map(|(p, _)| p).sum()
    }
}

/// Both sides of the wall/barrier identity for one `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub wall: WallProfile,
    pub s: i64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    pub truncation_mass: f64,
}

/// `P(x^f_n(T) > s)` against the barrier survival probability of the free
/// process, from the step configuration, for every `s` in `s_values`.
/// With `relaxed`, the survival event also asks `x_n(T) > s` (walls with
/// `f(0) > 0`).
pub fn verify_wall_identity(
    n: usize,
    wall: &WallProfile,
    horizon: f64,
    s_values: &[i64],
    relaxed: bool,
    capacity: usize,
) -> Result<Vec<IdentityReport>> {
    wall.check_start(relaxed)?;
    let free = SpeciesChain::for_step(n, horizon, capacity)?;
    let init: Vec<i64> = (0..n as i64).map(|k| -k).collect();
    let top = wall.effective(horizon).max(0);
    let walled = SpeciesChain::new(n, -(n as i64) + 1, top.saturating_add(1).min(free.hi), capacity)?;
    let law = walled.transient(&init, wall, horizon)?;
    let mut out = Vec::new();
    for &s in s_values {
        let lhs = walled.tail_prob(&law.probs, n, s);
        let barrier = BarrierProfile::new(s, horizon, wall.clone());
        let (rhs, tr) = free.survival(&init, n, &barrier, relaxed.then_some(s))?;
        out.push(IdentityReport {
            n,
            wall: wall.clone(),
            s,
            horizon,
            lhs,
            rhs,
            diff: (lhs - rhs).abs(),
            truncation_mass: law.truncation_mass() + tr.truncation_mass(),
        });
    }
    Ok(out)
}

/// Every `s` at which either side can differ from 0 or 1, plus one on
/// each side.
pub fn admissible_levels(n: usize, wall: &WallProfile, horizon: f64) -> Vec<i64> {
    (-(n as i64)..=wall.effective(horizon).max(0) + 1).collect()
}

/// Random integer staircases on `[0, T]` with `f(0) = start`.
pub fn staircase_family(count: usize, horizon: f64, start: f64, seed: u64) -> Vec<WallProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let steps = rng.gen_range(1..=4);
        let mut times: Vec<f64> = (0..steps).map(|_| (rng.gen_range(0.0..horizon) * 8.0).round() / 8.0).collect();
        if rng.gen_bool(0.3) {
            times[0] = 0.0;
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let mut v = start;
        let pieces: Vec<(f64, f64)> = times
            .into_iter()
            .map(|t| {
                v += rng.gen_range(0..=2) as f64;
                (t, v)
            })
            .collect();
        if let Ok(w) = WallProfile::staircase(start, pieces) {
            out.push(w);
        }
    }
    out
}

/// Permutations of a window, moving under the colored swap dynamics.
pub struct ColoredChain {
    lo: i64,
    states: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    gen: Generator,
    tail_tol: f64,
}

/// How the wall level depends on time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallDirection {
    Forward,
    Reversed,
}

impl ColoredChain {
    pub fn new(lo: i64, hi: i64, capacity: usize) -> Result<Self> {
        let m = (hi - lo + 1) as usize;
        let count: u128 = (1..=m as u128).product();
        if count > capacity as u128 {
            return Err(Error::Capacity { states: count.min(usize::MAX as u128) as usize, limit: capacity });
        }
        let mut states = Vec::with_capacity(count as usize);
        let mut p: Vec<i64> = (lo..=hi).collect();
        fn heap(k: usize, p: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if k <= 1 {
                out.push(p.clone());
                return;
            }
            for i in 0..k {
                heap(k - 1, p, out);
                if k % 2 == 0 {
                    p.swap(i, k - 1);
                } else {
                    p.swap(0, k - 1);
                }
            }
        }
        heap(m, &mut p, &mut states);
        let index: HashMap<Vec<i64>, usize> = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let moves = states
            .iter()
            .map(|s| {
                (0..m - 1)
                    .map(|i| {
                        let mut t = s.clone();
                        if t[i] < t[i + 1] {
                            t.swap(i, i + 1);
                        }
                        Some(index[&t])
                    })
                    .collect()
            })
            .collect();
        Ok(Self { lo, states, index, gen: Generator { moves }, tail_tol: DEFAULT_TAIL })
    }

    pub fn states(&self) -> &[Vec<i64>] {
        &self.states
    }

    pub fn config(&self, i: usize) -> ColoredConfig {
        ColoredConfig::new(self.lo, self.states[i].iter().map(|&c| Color::Finite(c)).collect())
    }

    pub fn index_of(&self, config: &ColoredConfig) -> Option<usize> {
        let key: Option<Vec<i64>> = config
            .colors()
            .iter()
            .map(|c| match c {
                Color::Finite(k) => Some(*k),
                Color::Hole => None,
            })
            .collect();
        key.and_then(|k| self.index.get(&k).copied())
    }

    /// Law at `horizon` from the identity, with the wall read as `f(t)` or
    /// `f(T - t)`.
    pub fn transient(&self, wall: &WallProfile, direction: WallDirection, rule: WallRule, horizon: f64) -> Result<Transient> {
        let id: Vec<i64> = (0..self.states[0].len() as i64).map(|k| self.lo + k).collect();
        let mut v = vec![0.0; self.states.len()];
        v[self.index[&id]] = 1.0;
        let mut cuts: Vec<f64> = vec![0.0, horizon];
        for (a, _) in wall_segments(wall, horizon) {
            let c = match direction {
                WallDirection::Forward => a,
                WallDirection::Reversed => horizon - a,
            };
            if c > 0.0 && c < horizon {
                cuts.push(c);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut leaked = 0.0;
        let mut tail = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let f = match direction {
                WallDirection::Forward => wall.value(mid),
                WallDirection::Reversed => wall.value(horizon - mid),
            };
            let lo = self.lo;
            let allowed = |_: usize, i: usize| !rule.suppresses(lo + i as i64, f);
            tail += uniformize(&self.gen, &mut v, w[1] - w[0], allowed, &mut leaked, self.tail_tol);
        }
        Ok(Transient { probs: v, leaked, tail })
    }

    /// Largest difference between the law of the inverse of the forward-wall
    /// process and the law of the reversed-wall process.
    pub fn inversion_gap(&self, wall: &WallProfile, rule: WallRule, horizon: f64) -> Result<f64> {
        let fwd = self.transient(wall, WallDirection::Forward, rule, horizon)?;
        let rev = self.transient(wall, WallDirection::Reversed, rule, horizon)?;
        let mut inv = vec![0.0; self.states.len()];
        for (i, p) in fwd.probs.iter().enumerate() {
            let j = self.index_of(&self.config(i).inverse()?).expect("inverse is a state");
            inv[j] += p;
        }
        Ok(inv.iter().zip(&rev.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ClockField;
    use crate::tasep::{evolve, ParticleConfig};
    use statrs::distribution::{Discrete, Poisson};

    #[test]
    fn single_particle_is_poisson() {
        let c = SpeciesChain::new(1, 0, 40, DEFAULT_CAPACITY).unwrap();
        let law = c.transient(&[0], &WallProfile::unbounded(), 2.0).unwrap();
        let pois = Poisson::new(2.0).unwrap();
        for k in 0..30 {
            assert!((law.probs[c.index_of(&[k]).unwrap()] - pois.pmf(k as u64)).abs() < 1e-10);
        }
        assert!(law.truncation_mass() < 1e-12);
    }

    #[test]
    fn zero_wall_pins_the_particle() {
        let c = SpeciesChain::new(1, -2, 10, DEFAULT_CAPACITY).unwrap();
        let w = WallProfile::staircase(0.0, vec![]).unwrap();
        let law = c.transient(&[0], &w, 3.0).unwrap();
        assert!((law.probs[c.index_of(&[0]).unwrap()] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(SpeciesChain::new(6, 0, 60, 1000), Err(Error::Capacity { .. })));
        assert!(matches!(ColoredChain::new(0, 9, 1000), Err(Error::Capacity { .. })));
    }

    #[test]
    fn rows_conserve_mass() {
        let c = SpeciesChain::new(3, -2, 30, DEFAULT_CAPACITY).unwrap();
        let law = c.transient(&[0, -1, -2], &WallProfile::unbounded(), 2.5).unwrap();
        let total: f64 = law.probs.iter().sum();
        assert!((total + law.leaked - 1.0).abs() < 1e-12);
        assert!(law.truncation_mass() < 1e-12);
    }

    #[test]
    fn survival_extremes() {
        let c = SpeciesChain::for_step(2, 2.0, DEFAULT_CAPACITY).unwrap();
        let w = WallProfile::staircase(0.0, vec![(0.0, 1.0)]).unwrap();
        // barrier far below: certain survival
        let b = BarrierProfile::new(-50, 2.0, w.clone());
        assert!((c.survival(&[0, -1], 2, &b, None).unwrap().0 - 1.0).abs() < 1e-12);
        // barrier at the label's start: certain death
        let b = BarrierProfile::new(-1 + 1, 2.0, w);
        assert!(c.survival(&[0, -1], 2, &b, None).unwrap().0.abs() < 1e-15);
    }

    #[test]
    fn identity_examples() {
        let zero = WallProfile::staircase(0.0, vec![]).unwrap();
        let r = verify_wall_identity(1, &zero, 1.0, &[-1, 0], false, DEFAULT_CAPACITY).unwrap();
        assert!((r[0].lhs - 1.0).abs() < 1e-12 && (r[0].rhs - 1.0).abs() < 1e-12);
        assert!(r[1].lhs.abs() < 1e-12 && r[1].rhs.abs() < 1e-12);
        let w = WallProfile::staircase(0.0, vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        for r in verify_wall_identity(3, &w, 2.0, &[0, 1, 2], false, DEFAULT_CAPACITY).unwrap() {
            assert!(r.diff <= 1e-9, "{r:?}");
            assert!(r.truncation_mass < 1e-12);
        }
    }

    #[test]
    fn identity_on_a_family() {
        for (i, w) in staircase_family(8, 2.0, 0.0, 4).iter().enumerate() {
            let n = 1 + i % 3;
            let s = admissible_levels(n, w, 2.0);
            for r in verify_wall_identity(n, w, 2.0, &s, false, DEFAULT_CAPACITY).unwrap() {
                assert!(r.diff <= 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn relaxed_identity_with_positive_start() {
        for w in staircase_family(6, 2.0, 1.0, 8) {
            assert!(verify_wall_identity(2, &w, 2.0, &[0], false, DEFAULT_CAPACITY).is_err());
            for r in verify_wall_identity(2, &w, 2.0, &admissible_levels(2, &w, 2.0), true, DEFAULT_CAPACITY).unwrap() {
                assert!(r.diff <= 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn doubling_depth_is_stable() {
        let w = WallProfile::staircase(0.0, vec![(0.5, 1.0), (1.5, 3.0)]).unwrap();
        let init = [0, -1, -2];
        let a = SpeciesChain::for_step(3, 3.0, DEFAULT_CAPACITY).unwrap();
        let b = SpeciesChain::for_step(3, 3.0, DEFAULT_CAPACITY).unwrap().with_tail(1e-30);
        let la = a.transient(&init, &w, 3.0).unwrap();
        let lb = b.transient(&init, &w, 3.0).unwrap();
        let d = la.probs.iter().zip(&lb.probs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-10);
    }

    #[test]
    fn two_particles_match_simulation() {
        let c = SpeciesChain::for_step(2, 2.0, DEFAULT_CAPACITY).unwrap();
        let law = c.transient(&[0, -1], &WallProfile::unbounded(), 2.0).unwrap();
        let runs = 40_000;
        let mut counts: HashMap<Vec<i64>, usize> = HashMap::new();
        for seed in 0..runs {
            let clocks = ClockField::new(seed, -3, 40).unwrap();
            let tr = evolve(&ParticleConfig::step(2), &clocks, 0.0, 2.0).unwrap();
            *counts.entry(tr.final_config().positions().to_vec()).or_default() += 1;
        }
        // distribution of the second particle: CDF within a DKW band
        let band = ((2.0f64 / 1e-3).ln() / (2.0 * runs as f64)).sqrt();
        for s in -1..8 {
            let exact = 1.0 - c.tail_prob(&law.probs, 2, s);
            let emp = counts.iter().filter(|(k, _)| k[1] <= s).map(|(_, v)| *v).sum::<usize>() as f64 / runs as f64;
            assert!((exact - emp).abs() < band, "s={s} exact={exact} emp={emp}");
        }
    }

    #[test]
    fn inversion_identity_exact() {
        let chain = ColoredChain::new(-2, 2, DEFAULT_CAPACITY).unwrap();
        let w = WallProfile::staircase(0.0, vec![(0.0, 1.0), (0.7, 2.0)]).unwrap();
        for rule in [WallRule::Floor, WallRule::Ceil] {
            assert!(chain.inversion_gap(&w, rule, 1.5).unwrap() < 1e-12);
        }
        let t = chain.transient(&w, WallDirection::Forward, WallRule::Floor, 1.5).unwrap();
        assert!((t.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
