//! One-term Edgeworth expansion
//! `Psi(x) = Phi(x/s) + c (1 - x^2/s^2) phi(x/s)`
//! as a distribution function, a signed density and an integrator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, norm_cdf, norm_pdf, QuadConfig};

/// How the correction coefficient is derived from `k3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `c = k3`.
    Literal,
    /// `c = k3 / (6 s^3)`.
    Classical,
}

/// Half-width, in units of `s`, over which the signed density must stay
/// non-negative for the expansion to count as monotone.
pub const MONOTONE_HALFWIDTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthApprox {
    pub s: f64,
    pub k3: f64,
    pub mode: Mode,
}

/// Piecewise-smooth payoffs for [`EdgeworthApprox::expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payoff {
    Constant { value: f64 },
    Identity,
    /// `x^k`
    Power { k: u32 },
    /// `exp(x + drift)`
    Exp { drift: f64 },
    /// `max(strike - exp(x + drift), 0)`
    Put { strike: f64, drift: f64 },
}

impl Payoff {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Payoff::Constant { value } => value,
            Payoff::Identity => x,
            Payoff::Power { k } => x.powi(k as i32),
            Payoff::Exp { drift } => (x + drift).exp(),
            Payoff::Put { strike, drift } => (strike - (x + drift).exp()).max(0.0),
        }
    }

    /// Points where the payoff is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            Payoff::Put { strike, drift } if strike > 0.0 => vec![strike.ln() - drift],
            _ => Vec::new(),
        }
    }
}

impl EdgeworthApprox {
    pub fn new(s: f64, k3: f64, mode: Mode) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::domain(format!("s must be positive, got {s}")));
        }
        if !k3.is_finite() {
            return Err(Error::domain("k3 must be finite"));
        }
        Ok(Self { s, k3, mode })
    }

    pub fn from_cumulants(s2: f64, k3: f64, mode: Mode) -> Result<Self> {
        if !(s2 > 0.0) {
            return Err(Error::domain(format!("s2 must be positive, got {s2}")));
        }
        Self::new(s2.sqrt(), k3, mode)
    }

    /// Coefficient of `(1 - z^2) phi(z)`.
    #[inline]
    pub fn coefficient(&self) -> f64 {
        match self.mode {
            Mode::Literal => self.k3,
            Mode::Classical => self.k3 / (6.0 * self.s.powi(3)),
        }
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        let z = x / self.s;
        norm_cdf(z) + self.coefficient() * (1.0 - z * z) * norm_pdf(z)
    }

    /// Signed density `phi(z)/s (1 + c (z^3 - 3z))`.
    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        let z = x / self.s;
        norm_pdf(z) / self.s * (1.0 + self.coefficient() * (z * z * z - 3.0 * z))
    }

    /// Largest `h` (in units of `s`, capped at 100) with a non-negative density on `[-h s, h s]`.
    pub fn monotone_halfwidth(&self) -> f64 {
        let c = self.coefficient();
        if c == 0.0 {
            return 100.0;
        }
        let p = |z: f64| (1.0 + c * (z * z * z - 3.0 * z)).min(1.0 - c * (z * z * z - 3.0 * z));
        let step = 1e-3;
        let mut z = 0.0;
        while z < 100.0 {
            let next = z + step;
            if p(next) < 0.0 {
                let (mut lo, mut hi) = (z, next);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if p(mid) < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return lo;
            }
            z = next;
        }
        100.0
    }

    /// Whether `Psi` is non-decreasing over `+-MONOTONE_HALFWIDTH * s`.
    pub fn is_monotone(&self) -> bool {
        self.monotone_halfwidth() >= MONOTONE_HALFWIDTH
    }

    /// `int payoff(x) dPsi(x)` by adaptive quadrature, split at payoff kinks.
    pub fn expectation(&self, payoff: &Payoff, quad: &QuadConfig) -> Result<f64> {
        let kinks = payoff.kinks();
        let reach = kinks.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        let half = 12.0 * self.s + reach;
        let mut breaks: Vec<f64> = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0].iter().map(|m| m * self.s).collect();
        breaks.extend(kinks);
        let res = integrate(|x| payoff.eval(x) * self.density(x), -half, half, &breaks, quad)?;
        Ok(res.value)
    }
}
