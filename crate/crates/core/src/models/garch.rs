use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `g_i(x) = w + u x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GCoef {
    pub w: f64,
    pub u: f64,
}

/// `c_i(x) = b + a x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CCoef {
    pub b: f64,
    pub a: f64,
}

/// Augmented GARCH with power link:
/// `V_k^(2 lambda) = sum_i g_i(eps_{k-i}) + sum_i c_i(eps_{k-i}) V_{k-i}^(2 lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchSpec {
    pub p: usize,
    pub q: usize,
    #[serde(default = "one")]
    pub lambda: f64,
    pub g_coeffs: Vec<GCoef>,
    pub c_coeffs: Vec<CCoef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

fn one() -> f64 {
    1.0
}

impl GarchSpec {
    /// GARCH(1,1) in the `(w, u, b, a)` parameterisation, `lambda = 1`.
    pub fn garch11(w: f64, u: f64, b: f64, a: f64) -> Self {
        Self {
            p: 1,
            q: 1,
            lambda: 1.0,
            g_coeffs: vec![GCoef { w, u }],
            c_coeffs: vec![CCoef { b, a }],
            burn_in: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.q == 0 {
            return Err(Error::domain("GARCH orders p, q must be positive"));
        }
        if self.g_coeffs.len() != self.p || self.c_coeffs.len() != self.q {
            return Err(Error::domain(format!(
                "expected {} g and {} c coefficient pairs, got {} and {}",
                self.p,
                self.q,
                self.g_coeffs.len(),
                self.c_coeffs.len()
            )));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.5) {
            return Err(Error::domain(format!("lambda must be >= 1/2, got {}", self.lambda)));
        }
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !self.g_coeffs.iter().all(|g| ok(g.w) && ok(g.u)) || !self.c_coeffs.iter().all(|c| ok(c.b) && ok(c.a)) {
            return Err(Error::domain("GARCH coefficients must be finite and non-negative"));
        }
        if !self.g_coeffs.iter().any(|g| g.w > 0.0) {
            return Err(Error::domain("at least one intercept w_i must be positive"));
        }
        Ok(())
    }

    /// `r = max(p, q)`.
    pub fn r(&self) -> usize {
        self.p.max(self.q)
    }

    /// True when every `c_i` vanishes identically.
    pub fn memoryless(&self) -> bool {
        self.c_coeffs.iter().all(|c| c.b == 0.0 && c.a == 0.0)
    }

    #[inline]
    pub fn g(&self, i: usize, x: f64) -> f64 {
        self.g_coeffs.get(i - 1).map_or(0.0, |g| g.w + g.u * x * x)
    }

    #[inline]
    pub fn c(&self, i: usize, x: f64) -> f64 {
        self.c_coeffs.get(i - 1).map_or(0.0, |c| c.b + c.a * x * x)
    }

    /// Fixed point of the mean recursion, `sum E g_i / (1 - sum E c_i)`, given `E eps^2 = m2`.
    ///
    /// `None` when `sum E c_i >= 1`.
    pub fn stationary_mean(&self, m2: f64) -> Option<f64> {
        let eg: f64 = self.g_coeffs.iter().map(|g| g.w + g.u * m2).sum();
        let ec: f64 = self.c_coeffs.iter().map(|c| c.b + c.a * m2).sum();
        (ec < 1.0).then(|| eg / (1.0 - ec))
    }
}

/// Runs the recursion forward over `eps`, writing `h_t = V_t^(2 lambda)` into `h`.
///
/// Terms reaching before `eps[0]` use `E g_i` and `E c_i * h_init`, given `E eps^2 = m2`.
pub(crate) fn recursion(spec: &GarchSpec, eps: &[f64], m2: f64, h_init: f64, h: &mut Vec<f64>) -> Result<()> {
    h.clear();
    h.reserve(eps.len());
    for t in 0..eps.len() {
        let mut acc = 0.0;
        for i in 1..=spec.p {
            acc += if t >= i { spec.g(i, eps[t - i]) } else { spec.g_coeffs[i - 1].w + spec.g_coeffs[i - 1].u * m2 };
        }
        for i in 1..=spec.q {
            acc += if t >= i {
                spec.c(i, eps[t - i]) * h[t - i]
            } else {
                (spec.c_coeffs[i - 1].b + spec.c_coeffs[i - 1].a * m2) * h_init
            };
        }
        if !acc.is_finite() {
            return Err(Error::Divergence { index: t });
        }
        h.push(acc);
    }
    Ok(())
}

/// Partial sum over `m <= M` of the series representation
/// `V_k^(2 lambda) = sum_m sum_{l_1..l_m} g_{l_m}(eps_{k-l_1-..-l_m}) prod_{i<m} c_{l_i}(eps_{k-l_1-..-l_i})`.
///
/// `past[i - 1]` is `eps_{k-i}`; at least `M * r` values are needed.
pub fn garch_volterra_eval(spec: &GarchSpec, past: &[f64], truncation: usize) -> Result<f64> {
    spec.validate()?;
    if truncation == 0 {
        return Err(Error::domain("truncation M must be positive"));
    }
    let r = spec.r();
    let needed = truncation * r;
    if past.len() < needed {
        return Err(Error::InputLength { needed, got: past.len() });
    }
    let eps = |s: usize| past[s - 1];
    // weight[s]: sum over prefixes (l_1..l_j) with total offset s of the c-products
    let span = (truncation - 1) * r;
    let mut weight = vec![0.0; span + 1];
    weight[0] = 1.0;
    let mut total = 0.0;
    for m in 1..=truncation {
        for (s, &w) in weight.iter().enumerate() {
            if w != 0.0 {
                let inner: f64 = (1..=spec.p).map(|l| spec.g(l, eps(s + l))).sum();
                total += w * inner;
            }
        }
        if m == truncation {
            break;
        }
        let mut next = vec![0.0; span + 1];
        for (s, &w) in weight.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for l in 1..=spec.q {
                if s + l <= span {
                    next[s + l] += w * spec.c(l, eps(s + l));
                }
            }
        }
        weight = next;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngkit::{derive_stream, sample, DistSpec, StreamKey};

    fn innovations(seed: u64, len: usize) -> Vec<f64> {
        sample(&mut derive_stream(&StreamKey::new(seed)), &DistSpec::StandardNormal, len).unwrap()
    }

    #[test]
    fn memoryless_series_is_first_layer() {
        let spec = GarchSpec {
            p: 2,
            q: 1,
            lambda: 1.0,
            g_coeffs: vec![GCoef { w: 0.3, u: 0.2 }, GCoef { w: 0.1, u: 0.4 }],
            c_coeffs: vec![CCoef { b: 0.0, a: 0.0 }],
            burn_in: None,
        };
        let past = innovations(1, 40);
        let direct = 0.3 + 0.2 * past[0] * past[0] + 0.1 + 0.4 * past[1] * past[1];
        for m in 1..=20 {
            assert!((garch_volterra_eval(&spec, &past, m).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn series_matches_recursion() {
        let spec = GarchSpec::garch11(0.1, 0.1, 0.5, 0.0);
        let fwd = innovations(2, 60);
        // recursion started from h = 0 and g = 0 before the window
        let mut h = 0.0;
        for t in 0..60 {
            h = spec.g(1, fwd[t]) + spec.c(1, fwd[t]) * h;
        }
        let past: Vec<f64> = fwd.iter().rev().copied().collect();
        let series = garch_volterra_eval(&spec, &past, 60).unwrap();
        assert!((series - h).abs() <= 1e-10 * h.abs());
    }

    #[test]
    fn higher_order_series_matches_recursion() {
        let spec = GarchSpec {
            p: 2,
            q: 3,
            lambda: 1.0,
            g_coeffs: vec![GCoef { w: 0.2, u: 0.05 }, GCoef { w: 0.1, u: 0.1 }],
            c_coeffs: vec![CCoef { b: 0.3, a: 0.05 }, CCoef { b: 0.1, a: 0.05 }, CCoef { b: 0.1, a: 0.0 }],
            burn_in: None,
        };
        let m = 80;
        let len = m * spec.r();
        let fwd = innovations(3, len);
        let mut h: Vec<f64> = Vec::new();
        for t in 0..len {
            let g: f64 = (1..=2).filter(|&i| t >= i).map(|i| spec.g(i, fwd[t - i])).sum();
            let c: f64 = (1..=3).filter(|&i| t >= i).map(|i| spec.c(i, fwd[t - i]) * h[t - i]).sum();
            h.push(g + c);
        }
        // h at time len (one past the window) from the recursion
        let g: f64 = (1..=2).map(|i| spec.g(i, fwd[len - i])).sum();
        let c: f64 = (1..=3).map(|i| spec.c(i, fwd[len - i]) * h[len - i]).sum();
        let target = g + c;
        let past: Vec<f64> = fwd.iter().rev().copied().collect();
        let series = garch_volterra_eval(&spec, &past, m).unwrap();
        assert!((series - target).abs() <= 1e-10 * target, "{series} vs {target}");
    }

    #[test]
    fn one_extra_layer() {
        // M=2 minus M=1 is g(eps_{k-2}) c(eps_{k-1}) for GARCH(1,1)
        let spec = GarchSpec::garch11(0.1, 0.1, 0.8, 0.1);
        let past = innovations(4, 10);
        let d = garch_volterra_eval(&spec, &past, 2).unwrap() - garch_volterra_eval(&spec, &past, 1).unwrap();
        let expect = (0.1 + 0.1 * past[1].powi(2)) * (0.8 + 0.1 * past[0].powi(2));
        assert!((d - expect).abs() < 1e-15);
    }

    #[test]
    fn short_history_is_rejected() {
        let spec = GarchSpec::garch11(0.1, 0.1, 0.8, 0.1);
        assert_eq!(
            garch_volterra_eval(&spec, &[0.0; 5], 6).unwrap_err(),
            Error::InputLength { needed: 6, got: 5 }
        );
    }
}
