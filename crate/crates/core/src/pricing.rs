//! European put on the terminal log-price `S_n / sqrt(n) + drift`, with the
//! initial price normalised to 1.

use serde::{Deserialize, Serialize};

use crate::edgeworth::{EdgeworthApprox, Mode, Payoff};
use crate::error::{Error, Result};
use crate::models::{estimate_centering, normalized_sums, ModelConfig, Simulator};
use crate::moments::CumulantEstimate;
use crate::numerics::{norm_cdf, QuadConfig};
use crate::rngkit::StreamKey;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingProblem {
    #[serde(rename = "K")]
    pub strike: f64,
    pub cfg: ModelConfig,
    pub drift: f64,
}

impl PricingProblem {
    pub fn new(strike: f64, cfg: ModelConfig, drift: f64) -> Result<Self> {
        if !(strike.is_finite() && strike > 0.0) {
            return Err(Error::domain(format!("strike K must be positive, got {strike}")));
        }
        if !drift.is_finite() {
            return Err(Error::domain("drift must be finite"));
        }
        cfg.validate()?;
        Ok(Self { strike, cfg, drift })
    }

    pub fn payoff(&self) -> Payoff {
        Payoff::Put { strike: self.strike, drift: self.drift }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceEstimate {
    pub price: f64,
    pub se: f64,
    #[serde(rename = "N")]
    pub replicates: usize,
}

/// Mean put payoff over `N` replicates of `S_n / sqrt(n)`; replicate `r` uses `key.child(r)`.
pub fn price_put_mc(prob: &PricingProblem, replicates: usize, key: &StreamKey, workers: usize) -> Result<PriceEstimate> {
    if replicates < 10_000 {
        return Err(Error::SampleSize { needed: 10_000, got: replicates });
    }
    let sim = Simulator::new(&prob.cfg)?;
    let sums = normalized_sums(&sim, replicates, key, workers)?;
    Ok(put_on_sample(prob.strike, prob.drift, &sums))
}

/// Put price and SE from given draws of the centred log-return.
pub fn put_on_sample(strike: f64, drift: f64, draws: &[f64]) -> PriceEstimate {
    let payoff = Payoff::Put { strike, drift };
    let nf = draws.len() as f64;
    let vals: Vec<f64> = draws.iter().map(|&x| payoff.eval(x)).collect();
    let price = vals.iter().sum::<f64>() / nf;
    let var = vals.iter().map(|v| (v - price).powi(2)).sum::<f64>() / (nf - 1.0);
    PriceEstimate { price, se: (var / nf).sqrt(), replicates: draws.len() }
}

/// Put price under the Edgeworth signed measure built from `cumulants`.
pub fn price_put_edgeworth(cumulants: &CumulantEstimate, drift: f64, strike: f64, mode: Mode) -> Result<f64> {
    cumulants.check_positive()?;
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::domain(format!("strike K must be positive, got {strike}")));
    }
    let approx = EdgeworthApprox::from_cumulants(cumulants.s2, cumulants.k3, mode)?;
    approx.expectation(&Payoff::Put { strike, drift }, &QuadConfig::with_abs_tol(1e-12 * strike.max(1.0)))
}

/// `E max(K - exp(Z + drift), 0)` for `Z ~ N(0, s^2)`.
pub fn price_put_gaussian_oracle(s: f64, strike: f64, drift: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::domain(format!("s must be positive, got {s}")));
    }
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::domain(format!("strike K must be positive, got {strike}")));
    }
    let d2 = (drift - strike.ln()) / s;
    let d1 = d2 + s;
    Ok(strike * norm_cdf(-d2) - (drift + 0.5 * s * s).exp() * norm_cdf(-d1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    pub drift: f64,
    pub se: f64,
}

/// Deterministic part `sqrt(n) E f(Y)` of the log-price for the model's
/// transform. Uses the configured centering when present, otherwise a
/// Monte Carlo estimate over `replicates` paths.
pub fn estimate_drift(cfg: &ModelConfig, replicates: usize, key: &StreamKey, workers: usize) -> Result<DriftEstimate> {
    let root_n = (cfg.n as f64).sqrt();
    if let Some(mu) = cfg.transform.centering {
        return Ok(DriftEstimate { drift: root_n * mu, se: 0.0 });
    }
    let c = estimate_centering(cfg, replicates, key, workers)?;
    Ok(DriftEstimate { drift: root_n * c.mean, se: root_n * c.se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Family, GarchSpec, TransformKind, TransformSpec};
    use crate::numerics::{integrate, norm_pdf};
    use crate::rngkit::DistSpec;

    fn gaussian_model(s: f64, n: usize) -> ModelConfig {
        ModelConfig {
            family: Family::Garch(GarchSpec::garch11(s * s, 0.0, 0.0, 0.0)),
            innovation: DistSpec::StandardNormal,
            transform: TransformSpec::identity(),
            n,
        }
    }

    #[test]
    fn oracle_matches_quadrature() {
        let (s, drift, k) = (0.2, -0.02, 1.0);
        let closed = price_put_gaussian_oracle(s, k, drift).unwrap();
        let kink = k.ln() - drift;
        let q = integrate(
            |z| (k - (z + drift).exp()).max(0.0) * norm_pdf(z / s) / s,
            -15.0 * s,
            kink,
            &[],
            &QuadConfig::with_abs_tol(1e-13),
        )
        .unwrap();
        assert!((closed - q.value).abs() < 1e-8, "{closed} vs {}", q.value);
    }

    #[test]
    fn oracle_limits() {
        let drift = 0.03_f64;
        assert!(price_put_gaussian_oracle(1e-9, drift.exp(), drift).unwrap() < 1e-8);
        let big = 1e12;
        assert!((price_put_gaussian_oracle(0.3, big, drift).unwrap() / big - 1.0).abs() < 1e-10);
    }

    #[test]
    fn edgeworth_gaussian_limit() {
        let c = CumulantEstimate::exact(0.04, 0.0, 1);
        for k in [0.8, 1.0, 1.25] {
            let e = price_put_edgeworth(&c, -0.02, k, Mode::Classical).unwrap();
            let g = price_put_gaussian_oracle(0.2, k, -0.02).unwrap();
            assert!((e - g).abs() < 1e-6);
        }
    }

    #[test]
    fn edgeworth_deep_in_the_money() {
        let (s, k3, drift) = (0.3_f64, 0.01, 0.05_f64);
        let c = CumulantEstimate::exact(s * s, k3, 1);
        let strike = drift.exp() * 1e6;
        let price = price_put_edgeworth(&c, drift, strike, Mode::Literal).unwrap();
        // E exp(x) under the signed measure is exp(s^2/2) (1 + c s^3) with c = k3 in literal mode
        let forward = (drift + 0.5 * s * s).exp() * (1.0 + k3 * s.powi(3));
        assert!((price - (strike - forward)).abs() < 1e-4 * strike);
    }

    #[test]
    fn mc_degenerate_and_worthless() {
        // transform == 0 gives a deterministic terminal price
        let zero = ModelConfig {
            transform: TransformSpec::new(TransformKind::Polynomial { coeffs: vec![0.0] }),
            ..gaussian_model(0.2, 4)
        };
        let prob = PricingProblem::new(1.1, zero, -0.02).unwrap();
        let p = price_put_mc(&prob, 10_000, &StreamKey::new(1), 0).unwrap();
        assert!((p.price - (1.1 - (-0.02f64).exp())).abs() < 1e-12 && p.se < 1e-12, "{p:?}");
        let prob = PricingProblem::new(1e-9, gaussian_model(0.2, 4), -0.02).unwrap();
        assert!(price_put_mc(&prob, 10_000, &StreamKey::new(1), 0).unwrap().price < 1e-9);
        assert!(PricingProblem::new(0.0, gaussian_model(0.2, 4), 0.0).is_err());
    }

    #[test]
    fn mc_matches_gaussian_oracle() {
        let prob = PricingProblem::new(1.0, gaussian_model(0.2, 4), -0.02).unwrap();
        let p = price_put_mc(&prob, 200_000, &StreamKey::new(2), 0).unwrap();
        let g = price_put_gaussian_oracle(0.2, 1.0, -0.02).unwrap();
        assert!((p.price - g).abs() < 3.0 * p.se, "{p:?} vs {g}");
    }

    #[test]
    fn drift_of_compensated_model() {
        // f(y) = y - y^2 / (2 sqrt n) gives sqrt(n) E f(Y) = -E Y^2 / 2 = -s^2/2
        let cfg = ModelConfig { transform: TransformSpec::compensator(2), ..gaussian_model(0.2, 16) };
        let d = estimate_drift(&cfg, 2000, &StreamKey::new(3), 0).unwrap();
        assert!((d.drift + 0.02).abs() < 4.0 * d.se, "{d:?}");
        let fixed = ModelConfig { transform: TransformSpec::compensator(2).with_centering(-0.005), ..cfg };
        assert_eq!(estimate_drift(&fixed, 0, &StreamKey::new(3), 0).unwrap().drift, -0.02);
    }

    #[test]
    fn prices_monotone_and_lipschitz_in_strike() {
        let c = CumulantEstimate::exact(0.04, 0.002, 1);
        let strikes: Vec<f64> = (0..9).map(|i| 0.8 + 0.05 * i as f64).collect();
        let prices: Vec<f64> = strikes.iter().map(|&k| price_put_edgeworth(&c, -0.02, k, Mode::Classical).unwrap()).collect();
        for i in 1..strikes.len() {
            let dp = prices[i] - prices[i - 1];
            assert!(dp >= 0.0 && dp <= strikes[i] - strikes[i - 1] + 1e-12);
        }
    }
}
