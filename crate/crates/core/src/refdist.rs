//! Airy functions and the GUE/GOE Tracy-Widom distribution functions as
//! Fredholm determinants, discretized by Gauss-Legendre quadrature.

use serde::Serialize;

use crate::error::{Error, Result};

const AI0: f64 = 0.355_028_053_887_817_24;
const AIP0: f64 = -0.258_819_403_792_806_8;

/// Taylor steps of `y'' = x y` from the origin.
fn airy_taylor(x: f64) -> (f64, f64) {
    let steps = (x.abs() / 0.5).ceil().max(1.0) as usize;
    let h = x / steps as f64;
    let (mut y, mut dy) = (AI0, AIP0);
    let mut x0 = 0.0;
    for _ in 0..steps {
        // (k + 2)(k + 1) a_{k+2} = x0 a_k + a_{k-1}
        let (mut prev, mut a0, mut a1) = (0.0, y, dy);
        let mut sum = a0 + a1 * h;
        let mut dsum = a1;
        let mut hk = h;
        let mut quiet = 0;
        for k in 0..200 {
            let a2 = (x0 * a0 + prev) / ((k + 2) as f64 * (k + 1) as f64);
            let dterm = (k + 2) as f64 * a2 * hk;
            hk *= h;
            let term = a2 * hk;
            sum += term;
            dsum += dterm;
            prev = a0;
            a0 = a1;
            a1 = a2;
            if term.abs() <= 1e-18 * sum.abs() && dterm.abs() <= 1e-18 * dsum.abs() {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        y = sum;
        dy = dsum;
        x0 += h;
    }
    (y, dy)
}

/// `K_nu(z) e^z` by the trapezoid rule on `int_0^inf exp(-z (cosh t - 1)) cosh(nu t) dt`.
fn bessel_k_scaled(nu: f64, z: f64) -> f64 {
    let h = (0.5 / z.sqrt()).min(0.25);
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let e = z * (t.cosh() - 1.0);
        if e > 745.0 {
            break;
        }
        let term = (-e).exp() * (nu * t).cosh();
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    sum * h
}

/// Asymptotic expansion on the negative axis, `x = -z`.
fn airy_oscillatory(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..40 {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    let (mut p, mut q, mut r, mut s) = (0.0, 0.0, 0.0, 0.0);
    let mut zp = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..40 {
        let term = u[k] * zp;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * u[k] * zp;
            r += sign * v[k] * zp;
        } else {
            q += sign * u[k] * zp;
            s += sign * v[k] * zp;
        }
        if term.abs() < 1e-17 {
            break;
        }
        zp /= zeta;
    }
    let ph = zeta - std::f64::consts::FRAC_PI_4;
    let (sn, cs) = ph.sin_cos();
    let pi_sqrt = std::f64::consts::PI.sqrt();
    let ai = (cs * p + sn * q) / (pi_sqrt * z.powf(0.25));
    let aip = z.powf(0.25) / pi_sqrt * (sn * r - cs * s);
    (ai, aip)
}

/// `(Ai(x), Ai'(x))` without range checks; zero beyond `x = 100`.
fn airy_unchecked(x: f64) -> (f64, f64) {
    if x > 105.0 {
        (0.0, 0.0)
    } else if x > 2.0 {
        let zeta = 2.0 / 3.0 * x * x.sqrt();
        let e = (-zeta).exp();
        let pi = std::f64::consts::PI;
        let ai = (x / 3.0).sqrt() / pi * bessel_k_scaled(1.0 / 3.0, zeta) * e;
        let aip = -x / (pi * 3f64.sqrt()) * bessel_k_scaled(2.0 / 3.0, zeta) * e;
        (ai, aip)
    } else if x >= -12.0 {
        airy_taylor(x)
    } else {
        airy_oscillatory(-x)
    }
}

/// `(Ai(x), Ai'(x))` for `|x| <= 100`.
pub fn airy(x: f64) -> Result<(f64, f64)> {
    if !(x.abs() <= 100.0) {
        return Err(Error::Domain(format!("Airy argument {x} outside [-100, 100]")));
    }
    Ok(airy_unchecked(x))
}

pub fn airy_ai(x: f64) -> Result<f64> {
    airy(x).map(|p| p.0)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                if m == 1 {
                    p0 = 1.0;
                    p1 = x;
                }
                dp = mf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// `int_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * f(c + r * u)).sum::<f64>() * r
    }
}

fn determinant(mut a: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i * n + c].abs().partial_cmp(&a[j * n + c].abs()).unwrap()).unwrap();
        if a[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..n {
                a.swap(c * n + k, p * n + k);
            }
            det = -det;
        }
        let d = a[c * n + c];
        det *= d;
        for i in c + 1..n {
            let f = a[i * n + c] / d;
            if f != 0.0 {
                for k in c + 1..n {
                    a[i * n + k] -= f * a[c * n + k];
                }
            }
        }
    }
    det
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    /// GOE.
    Tw1,
    /// GUE.
    Tw2,
}

impl std::str::FromStr for Law {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tw1" | "goe" => Ok(Law::Tw1),
            "tw2" | "gue" => Ok(Law::Tw2),
            _ => Err(Error::Domain(format!("unknown law `{s}` (expected tw1 or tw2)"))),
        }
    }
}

/// Range on which the determinants are evaluated.
pub const RANGE: (f64, f64) = (-10.0, 12.0);
pub const DEFAULT_NODES: usize = 80;

/// Nystrom discretization of `det(I - K)` on `(s, inf)` with the map
/// `x = s + L (1 + u) / (1 - u)`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    rule: GaussLegendre,
    scale: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(DEFAULT_NODES)
    }
}

impl Quadrature {
    pub fn new(m: usize) -> Self {
        Self { rule: GaussLegendre::new(m), scale: 2.0 }
    }

    pub fn nodes(&self) -> usize {
        self.rule.nodes.len()
    }

    fn points(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let l = self.scale;
        self.rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(|(&u, &w)| (s + l * (1.0 + u) / (1.0 - u), w * 2.0 * l / ((1.0 - u) * (1.0 - u))))
            .unzip()
    }

    /// Distribution function, clamped to `[0, 1]`, without range checks.
    pub fn cdf_unchecked(&self, law: Law, s: f64) -> f64 {
        let (x, w) = self.points(s);
        let n = x.len();
        let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        let mut a = vec![0.0; n * n];
        match law {
            Law::Tw2 => {
                let ai: Vec<(f64, f64)> = x.iter().map(|&v| airy_unchecked(v)).collect();
                for i in 0..n {
                    for j in 0..n {
                        let k = if i == j {
                            ai[i].1 * ai[i].1 - x[i] * ai[i].0 * ai[i].0
                        } else {
                            (ai[i].0 * ai[j].1 - ai[i].1 * ai[j].0) / (x[i] - x[j])
                        };
                        a[i * n + j] = -sw[i] * k * sw[j];
                    }
                }
            }
            Law::Tw1 => {
                for i in 0..n {
                    for j in 0..n {
                        let k = 0.5 * airy_unchecked(0.5 * (x[i] + x[j])).0;
                        a[i * n + j] = -sw[i] * k * sw[j];
                    }
                }
            }
        }
        for i in 0..n {
            a[i * n + i] += 1.0;
        }
        determinant(a, n).clamp(0.0, 1.0)
    }

    pub fn cdf(&self, law: Law, s: f64) -> Result<f64> {
        if !(s >= RANGE.0 && s <= RANGE.1) {
            return Err(Error::Domain(format!("s = {s} outside [{}, {}]", RANGE.0, RANGE.1)));
        }
        Ok(self.cdf_unchecked(law, s))
    }

    /// The distribution function, with 0 and 1 used beyond the range.
    pub fn cdf_or_limit(&self, law: Law, s: f64) -> f64 {
        if s < RANGE.0 {
            0.0
        } else if s > RANGE.1 {
            1.0
        } else {
            self.cdf_unchecked(law, s)
        }
    }

    /// Mean and variance from `int (1 - F)` and `int F` over the range.
    pub fn moments(&self, law: Law) -> (f64, f64) {
        let gl = GaussLegendre::new(16);
        let (a, b) = RANGE;
        let (mut m1, mut m2) = (0.0, 0.0);
        let mut lo = a;
        while lo < b {
            let hi = (lo + 1.0).min(b);
            m1 += gl.integrate(lo, hi, |s| {
                let f = self.cdf_unchecked(law, s);
                if s >= 0.0 {
                    1.0 - f
                } else {
                    -f
                }
            });
            m2 += gl.integrate(lo, hi, |s| {
                let f = self.cdf_unchecked(law, s);
                if s >= 0.0 {
                    2.0 * s * (1.0 - f)
                } else {
                    -2.0 * s * f
                }
            });
            lo = hi;
        }
        (m1, m2 - m1 * m1)
    }
}

pub fn tw1_cdf(s: f64) -> Result<f64> {
    Quadrature::default().cdf(Law::Tw1, s)
}

pub fn tw2_cdf(s: f64) -> Result<f64> {
    Quadrature::default().cdf(Law::Tw2, s)
}

/// `(F1(2^{2/3} s), F2(s))`: bounds for the crossover law at its transition point.
pub fn f21_bounds(s: f64) -> Result<(f64, f64)> {
    let q = Quadrature::default();
    let upper = q.cdf(Law::Tw2, s)?;
    let lower = q.cdf_or_limit(Law::Tw1, 2f64.powf(2.0 / 3.0) * s);
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &[(f64, f64, f64)] = &[
        (-100.0, 0.17675339323955287809, -0.2422970316605838054),
        (-50.0, -0.16188142361232092392, 0.96898983727674908714),
        (-15.0, 0.27821749087082892953, 0.27237420430864202083),
        (-12.5, -0.27627456138116024823, -0.41933133041950516441),
        (-12.0, -0.066555175054373129474, 1.0231104533679707299),
        (-9.0, -0.022133721547341403674, -0.97566398092633159471),
        (-8.3, -0.28223175995883097262, 0.49727679025320791239),
        (-5.0, 0.35076100902411431979, 0.32719281855444313679),
        (-2.5, -0.11232506769296608919, 0.67885273426479436337),
        (-1.0, 0.5355608832923521188, -0.010160567116645209395),
        (0.0, 0.35502805388781723926, -0.25881940379280679841),
        (0.7, 0.18916240039815008218, -0.19985119158228048105),
        (1.9, 0.040594420031529502034, -0.060436781785756547),
        (2.0, 0.034924130423274379135, -0.053090384433653631704),
        (2.1, 0.029952602115866522488, -0.046455994032674593872),
        (3.0, 0.0065911393574607191443, -0.011912976705951318474),
        (5.0, 0.00010834442813607441735, -0.000247413890868462476),
        (8.0, 4.6922076160992316256e-8, -1.3414392979067865743e-7),
        (15.0, 2.164962520737992299e-18, -8.4205679540177727661e-18),
        (30.0, 3.2082175915504955711e-49, -1.7598765814327259821e-48),
        (100.0, 2.6344821520881844896e-291, -2.6351403616044099336e-290),
    ];

    #[test]
    fn airy_matches_reference() {
        for &(x, ai, aip) in REFERENCE {
            let (a, b) = airy(x).unwrap();
            let tol = if x.abs() <= 15.0 { 1e-12 } else { 1e-10 * aip.abs().max(1.0) };
            assert!((a - ai).abs() < tol.max(1e-12 * ai.abs()), "Ai({x}) = {a}, want {ai}");
            assert!((b - aip).abs() < tol.max(1e-12 * aip.abs()) * 10.0, "Ai'({x}) = {b}, want {aip}");
            if x > 0.0 {
                assert!(((a - ai) / ai).abs() < 1e-11, "relative Ai({x})");
            }
        }
        assert!(airy(101.0).is_err());
        assert!(airy(f64::NAN).is_err());
    }

    #[test]
    fn airy_regions_agree_at_the_seams() {
        for x in [2.0, -12.0] {
            let a = airy_taylor(x);
            let b = if x > 0.0 { airy_unchecked(x + 1e-12) } else { airy_oscillatory(-x) };
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-11, "{x}: {a:?} {b:?}");
        }
    }

    #[test]
    fn airy_positive_decreasing() {
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let a = airy_ai(i as f64 * 0.1).unwrap();
            assert!(a > 0.0 && a < last);
            last = a;
        }
    }

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        let g = GaussLegendre::new(10);
        assert!(g.weights.iter().all(|&w| w > 0.0));
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        for p in 0..20 {
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((g.integrate(-1.0, 1.0, |x| x.powi(p)) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn cdfs_are_monotone_and_ordered() {
        let q = Quadrature::default();
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        for i in 0..=140 {
            let s = -8.0 + 0.1 * i as f64;
            let f2 = q.cdf(Law::Tw2, s).unwrap();
            let f1 = q.cdf(Law::Tw1, s).unwrap();
            assert!(f2 >= l2 - 1e-12 && f1 >= l1 - 1e-12);
            let (lo, hi) = f21_bounds(s).unwrap();
            assert!(lo <= hi + 1e-12, "s={s}");
            l1 = f1;
            l2 = f2;
        }
        assert!(q.cdf(Law::Tw2, -8.0).unwrap() < 1e-4);
        assert!(q.cdf(Law::Tw2, 4.0).unwrap() > 0.999);
        let (lo, hi) = f21_bounds(0.0).unwrap();
        assert!(lo < hi);
        assert!(q.cdf(Law::Tw2, 20.0).is_err());
    }

    #[test]
    fn moments_match_known_values() {
        let q = Quadrature::default();
        let (m, v) = q.moments(Law::Tw2);
        assert!((m + 1.771_086_807_4).abs() < 1e-6, "{m}");
        assert!((v - 0.813_194_792_8).abs() < 1e-6, "{v}");
        let (m, v) = q.moments(Law::Tw1);
        assert!((m + 1.206_533_574_5).abs() < 1e-6, "{m}");
        assert!((v - 1.607_781_034_5).abs() < 1e-6, "{v}");
    }

    #[test]
    fn node_doubling_converges() {
        let a = Quadrature::new(DEFAULT_NODES);
        let b = Quadrature::new(2 * DEFAULT_NODES);
        for i in 0..=28 {
            let s = -8.0 + 0.5 * i as f64;
            for law in [Law::Tw1, Law::Tw2] {
                let d = (a.cdf(law, s).unwrap() - b.cdf(law, s).unwrap()).abs();
                assert!(d < 1e-8, "{law:?} s={s} d={d}");
            }
        }
    }
}
