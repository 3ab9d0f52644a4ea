//! Site-indexed Poisson clocks with random access.
//!
//! Each site carries a rate-1 Poisson process. Time is cut into unit blocks;
//! the events of site `z` inside block `j` are produced on demand from a hash
//! of `(seed, z, j)`: a Poisson(1) count followed by that many uniform offsets.
//! Any block of any site can therefore be queried without touching the others,
//! and the same `(seed, window)` always yields the same realization.

use crate::error::{Error, Result};

/// A point in the global event order: time first, then site.
pub type EventKey = (f64, i64);

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed of replica `index` from a master seed.
pub fn split_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

// round(P(Poisson(1) <= k) * 2^32), k = 0..12; the count of a block is the
// number of thresholds at or below a uniform 32-bit word.
const COUNT_THRESHOLDS: [u64; 13] = [
    1_580_030_169,
    3_160_060_337,
    3_950_075_422,
    4_213_413_783,
    4_279_248_374,
    4_292_415_292,
    4_294_609_778,
    4_294_923_276,
    4_294_962_463,
    4_294_966_817,
    4_294_967_253,
    4_294_967_292,
    4_294_967_296,
];

#[inline]
fn block_count(word: u32) -> usize {
    let w = word as u64;
    let mut k = (w >= COUNT_THRESHOLDS[0]) as usize
        + (w >= COUNT_THRESHOLDS[1]) as usize
        + (w >= COUNT_THRESHOLDS[2]) as usize
        + (w >= COUNT_THRESHOLDS[3]) as usize;
    if k == 4 {
        while k < COUNT_THRESHOLDS.len() && w >= COUNT_THRESHOLDS[k] {
            k += 1;
        }
    }
    k
}

/// Offset in (0, 1) from a 32-bit word.
#[inline]
fn offset(word: u32) -> f64 {
    (word as f64 + 0.5) * (1.0 / 4_294_967_296.0)
}

const BLOCK_MUL: u64 = 0x9e37_79b9_7f4a_7c15;
const SLOT_MUL: u64 = 0xd1b5_4a32_d192_ed03;
const MAX_IN_BLOCK: usize = 16;

/// Rate-1 Poisson clocks on the sites of a finite window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockField {
    seed: u64,
    key: u64,
    lo: i64,
    hi: i64,
}

impl ClockField {
    pub fn new(seed: u64, lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Config {
                path: "clock.window".into(),
                msg: format!("empty window [{lo}, {hi}]"),
            });
        }
        Ok(Self { seed, key: mix64(seed ^ 0x6a09_e667_f3bc_c909), lo, hi })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, site: i64) -> bool {
        site >= self.lo && site <= self.hi
    }

    fn check(&self, site: i64) -> Result<()> {
        if self.contains(site) {
            Ok(())
        } else {
            Err(Error::OutOfWindow { site, lo: self.lo, hi: self.hi })
        }
    }

    #[inline]
    fn site_key(&self, site: i64) -> u64 {
        mix64(self.key ^ (site as u64))
    }

    #[inline]
    fn block_hash(site_key: u64, block: i64) -> u64 {
        mix64(site_key ^ (block as u64).wrapping_mul(BLOCK_MUL))
    }

    /// Event times of `site` inside block `[block, block + 1)`, unsorted.
    ///
    /// The low half of the block hash places the first event; further events
    /// take two offsets per extra hash.
    #[inline]
    fn block_raw(&self, site_key: u64, block: i64, out: &mut [f64; MAX_IN_BLOCK]) -> usize {
        let h = Self::block_hash(site_key, block);
        let n = block_count((h >> 32) as u32);
        let base = block as f64;
        if n > 0 {
            out[0] = base + offset(h as u32);
        }
        let mut i = 1;
        let mut pair = 1u64;
        while i < n {
            let g = mix64(h ^ pair.wrapping_mul(SLOT_MUL));
            out[i] = base + offset((g >> 32) as u32);
            if i + 1 < n {
                out[i + 1] = base + offset(g as u32);
            }
            i += 2;
            pair += 1;
        }
        n
    }

    /// Sorted, de-duplicated event times of `site` inside a block.
    fn block_events(&self, site_key: u64, block: i64, out: &mut [f64; MAX_IN_BLOCK]) -> usize {
        let n = self.block_raw(site_key, block, out);
        let s = &mut out[..n];
        s.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let mut m = 0;
        for i in 0..n {
            if m == 0 || out[i] > out[m - 1] {
                out[m] = out[i];
                m += 1;
            }
        }
        m
    }

    /// First event of `site` strictly after `key` in the (time, site) order.
    pub fn next_after(&self, site: i64, key: EventKey) -> Result<f64> {
        self.check(site)?;
        Ok(self.next_after_unchecked(site, key))
    }

    #[inline]
    pub(crate) fn next_after_unchecked(&self, site: i64, key: EventKey) -> f64 {
        let (t, tie) = key;
        let sk = self.site_key(site);
        let mut block = if t < 0.0 { 0 } else { t as i64 };
        let later = |e: f64| e > t || (e == t && site > tie);
        loop {
            let h = Self::block_hash(sk, block);
            let n = block_count((h >> 32) as u32);
            if n > 0 {
                let base = block as f64;
                let e0 = base + offset(h as u32);
                let mut best = if later(e0) { e0 } else { f64::INFINITY };
                let mut i = 1;
                let mut pair = 1u64;
                while i < n {
                    let g = mix64(h ^ pair.wrapping_mul(SLOT_MUL));
                    let e = base + offset((g >> 32) as u32);
                    if later(e) && e < best {
                        best = e;
                    }
                    if i + 1 < n {
                        let e = base + offset(g as u32);
                        if later(e) && e < best {
                            best = e;
                        }
                    }
                    i += 2;
                    pair += 1;
                }
                if best < f64::INFINITY {
                    return best;
                }
            }
            block += 1;
        }
    }

    /// Last event of `site` strictly before time `t` and strictly after `floor`.
    pub(crate) fn prev_before_unchecked(&self, site: i64, t: f64, floor: f64) -> Option<f64> {
        if t <= 0.0 {
            return None;
        }
        let sk = self.site_key(site);
        let mut block = t.floor() as i64;
        if block as f64 == t {
            block -= 1;
        }
        let mut buf = [0.0; MAX_IN_BLOCK];
        while block >= 0 && (block as f64 + 1.0) > floor {
            let n = self.block_events(sk, block, &mut buf);
            for &e in buf[..n].iter().rev() {
                if e < t {
                    return if e > floor { Some(e) } else { None };
                }
            }
            block -= 1;
        }
        None
    }

    /// All events of `site` in the half-open interval `(t0, t1]`, ascending.
    pub fn events_in(&self, site: i64, t0: f64, t1: f64) -> Result<Vec<f64>> {
        self.check(site)?;
        let mut v = Vec::new();
        self.events_between(site, t0, t1, &mut v);
        Ok(v)
    }

    pub(crate) fn events_between(&self, site: i64, t0: f64, t1: f64, out: &mut Vec<f64>) {
        if t1 <= t0 {
            return;
        }
        let sk = self.site_key(site);
        let mut buf = [0.0; MAX_IN_BLOCK];
        let first = if t0 < 0.0 { 0 } else { t0.floor() as i64 };
        let last = t1.floor() as i64;
        for block in first..=last {
            let n = self.block_events(sk, block, &mut buf);
            out.extend(buf[..n].iter().copied().filter(|&e| e > t0 && e <= t1));
        }
    }

    /// All events of the window sites in `(t0, t1]`, merged by (time, site).
    pub fn merged_events(&self, t0: f64, t1: f64) -> Vec<EventKey> {
        let mut all = Vec::new();
        let mut tmp = Vec::new();
        for site in self.lo..=self.hi {
            tmp.clear();
            self.events_between(site, t0, t1, &mut tmp);
            all.extend(tmp.iter().map(|&e| (e, site)));
        }
        all.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        all
    }
}

/// Lexicographic maximum of two event keys.
#[inline]
pub(crate) fn key_max(a: EventKey, b: EventKey) -> EventKey {
    if a.0 > b.0 || (a.0 == b.0 && a.1 >= b.1) {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_thresholds_follow_poisson() {
        let mut acc = 0.0;
        let mut p = (-1.0f64).exp();
        for (k, &c) in COUNT_THRESHOLDS.iter().enumerate() {
            acc += p;
            let want = (acc * 4_294_967_296.0f64).round() as u64;
            assert_eq!(c, want, "k={k}");
            p /= (k + 1) as f64;
        }
        assert_eq!(block_count(0), 0);
        assert_eq!(block_count(u32::MAX), 12);
    }

    #[test]
    fn same_seed_same_events() {
        let a = ClockField::new(7, -10, 10).unwrap();
        let b = ClockField::new(7, -10, 10).unwrap();
        assert_eq!(a.events_in(0, 0.0, 10.0).unwrap(), b.events_in(0, 0.0, 10.0).unwrap());
        let c = ClockField::new(8, -10, 10).unwrap();
        assert_ne!(a.events_in(0, 0.0, 10.0).unwrap(), c.events_in(0, 0.0, 10.0).unwrap());
    }

    #[test]
    fn prefix_stable_under_longer_horizon() {
        let a = ClockField::new(3, 0, 0).unwrap();
        let short = a.events_in(0, 0.0, 5.0).unwrap();
        let long = a.events_in(0, 0.0, 50.0).unwrap();
        assert_eq!(&long[..short.len()], &short[..]);
        assert!(long[short.len()] > 5.0);
    }

    #[test]
    fn events_strictly_increasing_and_positive() {
        let a = ClockField::new(11, -3, 3).unwrap();
        for z in -3..=3 {
            let ev = a.events_in(z, 0.0, 200.0).unwrap();
            assert!(ev[0] > 0.0);
            assert!(ev.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn next_after_matches_events_in() {
        let a = ClockField::new(5, 0, 3).unwrap();
        let ev = a.events_in(2, 0.0, 40.0).unwrap();
        let mut t = 0.0;
        for &e in &ev {
            let n = a.next_after(2, (t, i64::MAX)).unwrap();
            assert_eq!(n, e);
            t = e;
        }
        // ties are broken by site
        let e = ev[3];
        assert_eq!(a.next_after(2, (e, 1)).unwrap(), e);
        assert_eq!(a.next_after(2, (e, 2)).unwrap(), ev[4]);
    }

    #[test]
    fn prev_before_matches_events_in() {
        let a = ClockField::new(9, 0, 0).unwrap();
        let ev = a.events_in(0, 0.0, 30.0).unwrap();
        for i in 1..ev.len() {
            assert_eq!(a.prev_before_unchecked(0, ev[i], 0.0), Some(ev[i - 1]));
            assert_eq!(a.prev_before_unchecked(0, ev[i], ev[i - 1]), None);
        }
        assert_eq!(a.prev_before_unchecked(0, ev[0], 0.0), None);
    }

    #[test]
    fn out_of_window_is_an_error() {
        let a = ClockField::new(1, -2, 2).unwrap();
        assert!(matches!(a.events_in(3, 0.0, 1.0), Err(Error::OutOfWindow { .. })));
        assert!(ClockField::new(1, 2, 1).is_err());
    }

    #[test]
    fn merged_order_is_time_then_site() {
        let a = ClockField::new(2, -4, 4).unwrap();
        let m = a.merged_events(0.0, 20.0);
        assert!(m.windows(2).all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1)));
        let total: usize = (-4..=4).map(|z| a.events_in(z, 0.0, 20.0).unwrap().len()).sum();
        assert_eq!(total, m.len());
    }

    #[test]
    fn counts_and_gaps_look_exponential() {
        // mean and variance of the count on [0, 2000] and of the gaps
        let a = ClockField::new(42, 0, 0).unwrap();
        let ev = a.events_in(0, 0.0, 20000.0).unwrap();
        let n = ev.len() as f64;
        assert!((n - 20000.0).abs() < 5.0 * 20000f64.sqrt());
        let mut gaps: Vec<f64> = ev.windows(2).map(|w| w[1] - w[0]).collect();
        let m = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let v = gaps.iter().map(|g| (g - m).powi(2)).sum::<f64>() / gaps.len() as f64;
        assert!((m - 1.0).abs() < 0.03 && (v - 1.0).abs() < 0.06);
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let k = gaps.len() as f64;
        let d = gaps
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let f = 1.0 - (-g).exp();
                (f - i as f64 / k).abs().max(((i + 1) as f64 / k - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.63 / k.sqrt(), "ks {d}");
    }

    #[test]
    fn split_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| split_seed(1, i)).collect();
        let mut u = s.clone();
        u.sort();
        u.dedup();
        assert_eq!(u.len(), 100);
    }
}
