//! Macroscopic constants for the wall problem and the linear-wall classifier.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::wall::WallProfile;

/// Limiting macroscopic threshold `f0(beta)` for target level `xi`.
pub fn f0_threshold(xi: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("beta = {beta} outside [0, 1]")));
    }
    let hi = 1.0 - 2.0 * alpha.sqrt();
    if xi < -alpha - 1e-15 || xi > hi + 1e-15 {
        return Err(Error::Domain(format!("xi = {xi} outside [{}, {hi}]", -alpha)));
    }
    Ok(if beta < 1.0 - alpha {
        let r = (1.0 - beta).sqrt();
        xi - r * (r - 2.0 * alpha.sqrt())
    } else {
        xi + alpha
    })
}

/// Fluctuation constants for the tagged label `alpha T` observed around
/// macroscopic time `alpha0 T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaling {
    pub alpha: f64,
    pub alpha0: f64,
}

impl Scaling {
    pub fn new(alpha: f64, alpha0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < alpha0 && alpha0 <= 1.0) {
            return Err(Error::Domain(format!("need 0 < alpha < alpha0 <= 1 (alpha={alpha}, alpha0={alpha0})")));
        }
        Ok(Self { alpha, alpha0 })
    }

    fn gap(&self) -> f64 {
        self.alpha0.sqrt() - self.alpha.sqrt()
    }

    /// Spatial fluctuation scale coefficient.
    pub fn c1(&self) -> f64 {
        self.gap().powf(2.0 / 3.0) * self.alpha0.powf(1.0 / 6.0) / self.alpha.powf(1.0 / 6.0)
    }

    /// Temporal correlation scale coefficient.
    pub fn c2(&self) -> f64 {
        2.0 * self.gap().powf(1.0 / 3.0) * self.alpha0.powf(5.0 / 6.0) / self.alpha.powf(1.0 / 3.0)
    }

    /// Centering of `x_{alpha T}` at time `alpha0 T - c2 tau T^{2/3}`.
    pub fn mu(&self, tau: f64, t: f64) -> f64 {
        let (a, a0) = (self.alpha, self.alpha0);
        a0.sqrt() * (a0.sqrt() - 2.0 * a.sqrt()) * t
            - 2.0 * tau * self.gap().powf(4.0 / 3.0) * a0.powf(1.0 / 3.0) * a.powf(-1.0 / 3.0) * t.powf(2.0 / 3.0)
    }

    /// Real time corresponding to the rescaled time `tau`.
    pub fn time(&self, tau: f64, t: f64) -> f64 {
        self.alpha0 * t - self.c2() * tau * t.powf(2.0 / 3.0)
    }

    /// Rescaled position `(x - mu) / (-c1 T^{1/3})`.
    pub fn rescale(&self, x: f64, tau: f64, t: f64) -> f64 {
        (x - self.mu(tau, t)) / (-self.c1() * t.powf(1.0 / 3.0))
    }

    /// Barrier `g_T(tau)` encoded by a wall for target level `xi`.
    pub fn extract_g(&self, wall: &WallProfile, xi: f64, t: f64, tau: f64) -> f64 {
        let u = (1.0 - self.alpha0) * t + self.c2() * tau * t.powf(2.0 / 3.0);
        self.g_from(wall.value(u), xi, t, tau)
    }

    /// Same, with the wall clock started at `alpha0 T` instead of at 0.
    pub fn extract_g_shifted(&self, wall: &WallProfile, xi: f64, t: f64, tau: f64) -> f64 {
        let u = self.c2() * tau * t.powf(2.0 / 3.0);
        self.g_from(wall.value(u), xi, t, tau)
    }

    fn g_from(&self, f: f64, xi: f64, t: f64, tau: f64) -> f64 {
        tau * tau - (xi * t - self.mu(tau, t) - f) / (self.c1() * t.powf(1.0 / 3.0))
    }
}

/// Limit distribution of the rescaled tagged position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitLaw {
    /// `F1(2^{2/3} s)`.
    Goe,
    /// `F2(s)`.
    Gue,
    /// Crossover law, bracketed by the two above.
    TwoToOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearCase {
    pub case: char,
    pub xi: f64,
    pub c1: f64,
    pub alpha0: f64,
    pub law: LimitLaw,
}

/// Boundary value of `alpha` separating wall-dominated from free behaviour.
pub fn critical_alpha(v: f64, c: f64) -> f64 {
    let r = 1.0 - v - (c * (1.0 - v)).sqrt();
    r * r
}

/// Classify the linear wall `cT + vt` for the tagged label `alpha T`.
pub fn classify_linear(v: f64, c: f64, alpha: f64) -> Result<LinearCase> {
    if !(0.0..1.0).contains(&v) || c < 0.0 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("need v in [0,1), c >= 0, alpha in (0,1) (v={v}, c={c}, alpha={alpha})")));
    }
    let free = |case| {
        let s = Scaling::new(alpha, 1.0)?;
        Ok(LinearCase { case, xi: 1.0 - 2.0 * alpha.sqrt(), c1: s.c1(), alpha0: 1.0, law: LimitLaw::Gue })
    };
    if c >= 1.0 - v {
        return free('c');
    }
    let crit = critical_alpha(v, c);
    let tol = 1e-12 * crit.max(1e-300);
    if (alpha - crit).abs() <= tol {
        if c == 0.0 {
            let s = Scaling::new(alpha, 1.0)?;
            return Ok(LinearCase {
                case: 'b',
                xi: 1.0 - 2.0 * alpha.sqrt(),
                c1: s.c1(),
                alpha0: 1.0,
                law: LimitLaw::TwoToOne,
            });
        }
        return Err(Error::Domain(format!(
            "alpha = {alpha} sits on the shock boundary for c = {c} > 0; no fluctuation limit is defined"
        )));
    }
    if alpha < crit {
        let alpha0 = alpha / (1.0 - v).powi(2);
        Ok(LinearCase {
            case: 'a',
            xi: v + c - alpha / (1.0 - v),
            c1: alpha.powf(1.0 / 3.0) * v.powf(2.0 / 3.0) / (1.0 - v),
            alpha0,
            law: LimitLaw::Goe,
        })
    } else {
        free('c')
    }
}
