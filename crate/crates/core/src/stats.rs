//! Empirical distributions, goodness-of-fit statistics and the rescaled
//! observables used by the experiments.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::colored::second_class::MixtureLaw;
use crate::error::{Error, Result};
use crate::wall::scaling::Scaling;

/// Sorted samples.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Ecdf {
    samples: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.retain(|x| !x.is_nan());
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (self.samples.len() as f64 - 1.0)
    }

    pub fn merge(&self, other: &Ecdf) -> Ecdf {
        let mut all = self.samples.clone();
        all.extend_from_slice(&other.samples);
        Ecdf::new(all)
    }

    /// Distinct values with the ECDF just below and at each.
    fn steps(&self) -> Vec<(f64, f64, f64)> {
        let n = self.samples.len() as f64;
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.samples.len() {
            let x = self.samples[i];
            let mut j = i;
            while j < self.samples.len() && self.samples[j] == x {
                j += 1;
            }
            out.push((x, i as f64 / n, j as f64 / n));
            i = j;
        }
        out
    }
}

/// `sqrt(ln(2 / delta) / (2 n))`.
pub fn dkw_band(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Sup distance to a continuous distribution function.
pub fn ks_distance<F: FnMut(f64) -> f64>(ecdf: &Ecdf, mut cdf: F) -> f64 {
    ecdf.steps()
        .into_iter()
        .map(|(x, below, at)| {
            let f = cdf(x);
            (f - below).max(at - f)
        })
        .fold(0.0, f64::max)
}

/// Sup distance to a distribution function with jumps; `left(x)` is its
/// left limit. Both one-sided gaps are taken at every sample point.
pub fn ks_distance_discrete<F, G>(ecdf: &Ecdf, mut cdf: F, mut left: G) -> f64
where
    F: FnMut(f64) -> f64,
    G: FnMut(f64) -> f64,
{
    ecdf.steps()
        .into_iter()
        .map(|(x, below, at)| (left(x) - below).abs().max((at - cdf(x)).abs()))
        .fold(0.0, f64::max)
}

/// Sup distance between two ECDFs.
pub fn ks_two_sample(a: &Ecdf, b: &Ecdf) -> f64 {
    let mut d: f64 = 0.0;
    for x in a.samples().iter().chain(b.samples()) {
        d = d.max((a.cdf(*x) - b.cdf(*x)).abs());
    }
    d
}

/// Kolmogorov distribution tail `P(K > lambda)`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a one-sample KS distance with the small-sample
/// correction of Stephens.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)
}

/// Chi-square statistic of observed counts against expected counts, and its
/// p-value with `counts - 1 - fitted` degrees of freedom.
pub fn chi_square(observed: &[u64], expected: &[f64], fitted: usize) -> Result<(f64, f64)> {
    if observed.len() != expected.len() || observed.len() < 2 + fitted {
        return Err(Error::Domain("chi-square needs matching bins and positive degrees of freedom".into()));
    }
    if let Some(e) = expected.iter().find(|&&e| e < 5.0) {
        return Err(Error::Domain(format!("expected bin count {e:.2} below 5; widen the bins")));
    }
    let stat: f64 = observed.iter().zip(expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
    let dof = (observed.len() - 1 - fitted) as f64;
    let p = 1.0 - ChiSquared::new(dof).expect("positive dof").cdf(stat);
    Ok((stat, p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureReport {
    pub window: f64,
    pub atom_location: f64,
    /// Fraction of samples within `window` of the atom.
    pub near_atom: f64,
    /// `near_atom` minus the uniform mass expected inside the same window.
    pub atom_estimate: f64,
    pub uniform_estimate: f64,
    pub total_mass: f64,
    pub chi_square: f64,
    pub p_value: f64,
    pub bins: Vec<u64>,
}

/// Split samples of `position / T` into the atom and the uniform part of
/// `law`, and test the uniform part with a chi-square on `bins` equal bins
/// of `(-1 + window, atom - window)`. Both edge windows are left out of the
/// chi-square: at finite `T` the fan edge at `-1` is smeared over a few
/// `T^{-1/2}`.
pub fn mixture_test(samples: &[f64], law: &MixtureLaw, window: f64, bins: usize) -> Result<MixtureReport> {
    if samples.is_empty() {
        return Err(Error::Domain("no samples".into()));
    }
    let n = samples.len() as f64;
    let r = law.right;
    let near = samples.iter().filter(|&&x| (x - r).abs() <= window).count() as f64 / n;
    let overlap = (r.min(r + window) - (r - window).max(-1.0)).max(0.0);
    let atom = near - 0.5 * overlap;
    let (lo, hi) = (-1.0 + window, r - window);
    if hi <= lo {
        return Err(Error::Domain(format!("edge windows of {window} leave no uniform support")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if x > lo && x < hi {
            counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    let inside: u64 = counts.iter().sum();
    let expected = vec![inside as f64 / bins as f64; bins];
    let (chi2, p) = chi_square(&counts, &expected, 0)?;
    let below = samples.iter().filter(|&&x| x < hi).count() as f64;
    let uniform = below / n + 0.5 * overlap;
    Ok(MixtureReport {
        window,
        atom_location: r,
        near_atom: near,
        atom_estimate: atom,
        uniform_estimate: uniform,
        total_mass: atom + uniform,
        chi_square: chi2,
        p_value: p,
        bins: counts,
    })
}

/// Largest change of a path sampled on `taus` over pairs at most `delta` apart.
pub fn modulus_of_continuity(taus: &[f64], values: &[f64], delta: f64) -> f64 {
    let mut w: f64 = 0.0;
    for i in 0..taus.len() {
        for j in i + 1..taus.len() {
            if (taus[j] - taus[i]).abs() <= delta + 1e-12 {
                w = w.max((values[j] - values[i]).abs());
            }
        }
    }
    w
}

/// Tagged position at time `alpha0 T - c2 tau T^{2/3}`, centred and scaled
/// by `-c1 T^{1/3}`.
pub fn rescale_tagged(position: f64, tau: f64, alpha: f64, alpha0: f64, horizon: f64) -> Result<f64> {
    Ok(Scaling::new(alpha, alpha0)?.rescale(position, tau, horizon))
}
