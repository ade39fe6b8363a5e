//! Volatility model families `Y_k = eps_k V_{k-1}` and the transformed
//! observations `X_k = f(Y_k) - mu_f`.
//!
//! Innovations are indexed in time from `1 - B` to `n`, with `B` the burn-in.
//! The volatility `V_t` is adapted to `eps_{..=t}`; `x_path[k]` is
//! `f(eps_{k+1} V_k) - mu_f` and `v_path[k]` is `V_k`.

mod garch;
mod iterated;
mod kernel;
mod linear;
mod transform;
mod volterra;

use serde::{Deserialize, Serialize};

pub use garch::{garch_volterra_eval, CCoef, GCoef, GarchSpec};
pub use iterated::IteratedSpec;
pub use kernel::{Kernel, KernelCheck};
pub use linear::{InnerMap, LinearSpec, OuterHolder, OuterMap};
pub use transform::{apply_transform, holder_ratio, HolderSpec, TransformKind, TransformSpec};
pub use volterra::VolterraSpec;

use crate::error::{Error, Result};
use crate::parallel::try_par_map;
use crate::rngkit::{derive_stream, DistSpec, Sampler, StreamKey};

/// Minimum burn-in for families with infinite memory.
pub const MIN_BURN_IN: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Family {
    Garch(GarchSpec),
    Iterated(IteratedSpec),
    Linear(LinearSpec),
    Volterra(VolterraSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub family: Family,
    pub innovation: DistSpec,
    pub transform: TransformSpec,
    pub n: usize,
}

impl ModelConfig {
    /// `Y_k = eps_k`: GARCH(1,1) with `g = 1`, `c = 0`, so `V = 1`.
    pub fn iid(innovation: DistSpec, transform: TransformSpec, n: usize) -> Self {
        Self { family: Family::Garch(GarchSpec::garch11(1.0, 0.0, 0.0, 0.0)), innovation, transform, n }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("horizon n must be positive"));
        }
        self.innovation.validate()?;
        self.transform.validate()?;
        match &self.family {
            Family::Garch(s) => s.validate()?,
            Family::Iterated(s) => s.validate()?,
            Family::Linear(s) => s.validate()?,
            Family::Volterra(s) => s.validate()?,
        }
        let min = self.min_burn_in();
        if let Some(b) = self.configured_burn_in() {
            if b < min {
                return Err(Error::BurnIn { got: b, min });
            }
        }
        Ok(())
    }

    fn configured_burn_in(&self) -> Option<usize> {
        match &self.family {
            Family::Garch(s) => s.burn_in,
            Family::Iterated(s) => s.burn_in,
            Family::Linear(s) => s.burn_in,
            Family::Volterra(s) => s.burn_in,
        }
    }

    /// Number of leading innovations the first needed volatility depends on,
    /// for families whose volatility has finite memory.
    pub fn finite_memory(&self) -> Option<usize> {
        match &self.family {
            Family::Garch(s) if s.memoryless() => Some(s.p + 1),
            Family::Garch(_) | Family::Iterated(_) => None,
            Family::Linear(s) => Some(s.m_max() + 1),
            Family::Volterra(s) => Some(s.m_max() + 1),
        }
    }

    /// Smallest admissible burn-in: exact for finite memory, [`MIN_BURN_IN`] otherwise.
    pub fn min_burn_in(&self) -> usize {
        self.finite_memory().unwrap_or(MIN_BURN_IN)
    }

    /// Configured burn-in, or the default for the family.
    pub fn burn_in(&self) -> usize {
        self.configured_burn_in().unwrap_or_else(|| match (&self.family, self.finite_memory()) {
            (_, Some(m)) => m,
            (Family::Garch(s), None) => MIN_BURN_IN.max(10 * s.r()),
            _ => MIN_BURN_IN,
        })
    }
}

/// One simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
}

/// Which innovations the coupled path replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMode {
    /// Every innovation at or before the cut.
    Star,
    /// Only the innovation at the cut.
    Prime,
}

/// A validated model ready for repeated simulation.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ModelConfig,
    sampler: Sampler,
    burn_in: usize,
    m2: f64,
    coeffs: Vec<f64>,
}

impl Simulator {
    pub fn new(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let coeffs = match &cfg.family {
            Family::Linear(s) => s.kernel.coeffs(s.m_max()),
            Family::Volterra(s) => s.kernel.coeffs(s.m_max()),
            _ => Vec::new(),
        };
        Ok(Self {
            sampler: cfg.innovation.sampler()?,
            burn_in: cfg.burn_in(),
            m2: cfg.innovation.moment(2),
            coeffs,
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    fn len(&self) -> usize {
        self.burn_in + self.cfg.n
    }

    fn innovations(&self, key: &StreamKey) -> Vec<f64> {
        let mut eps = vec![0.0; self.len()];
        self.sampler.fill(&mut derive_stream(key), &mut eps);
        eps
    }

    /// Volatility at array positions `burn_in - 1 ..`; earlier entries are unused.
    fn volatility(&self, eps: &[f64]) -> Result<Vec<f64>> {
        let start = self.burn_in - 1;
        let mut v = vec![0.0; eps.len()];
        match &self.cfg.family {
            Family::Garch(s) => {
                let h_init = s
                    .stationary_mean(self.m2)
                    .unwrap_or_else(|| s.g_coeffs.iter().map(|g| g.w + g.u * self.m2).sum());
                let mut h = Vec::new();
                garch::recursion(s, eps, self.m2, h_init, &mut h)?;
                let pow = 0.5 / s.lambda;
                for (t, (vt, ht)) in v.iter_mut().zip(&h).enumerate() {
                    *vt = if pow == 0.5 { ht.sqrt() } else { ht.powf(pow) };
                    if !vt.is_finite() {
                        return Err(Error::Divergence { index: t });
                    }
                }
            }
            Family::Iterated(s) => {
                let mut cur = s.v0;
                for (t, (vt, &e)) in v.iter_mut().zip(eps).enumerate() {
                    cur = s.step(cur, e);
                    if !cur.is_finite() {
                        return Err(Error::Divergence { index: t });
                    }
                    *vt = cur;
                }
            }
            Family::Linear(s) => {
                for t in start..eps.len() {
                    let g: f64 = self
                        .coeffs
                        .iter()
                        .take(t + 1)
                        .enumerate()
                        .map(|(i, a)| a * s.inner.apply(eps[t - i]))
                        .sum();
                    v[t] = s.outer.apply(g);
                    if !v[t].is_finite() {
                        return Err(Error::Divergence { index: t });
                    }
                }
            }
            Family::Volterra(s) => {
                let mut work = vec![0.0; s.orders + 1];
                for t in start..eps.len() {
                    let z = self.coeffs.iter().take(t + 1).enumerate().map(|(j, k)| k * eps[t - j]);
                    v[t] = volterra::symmetric_sum(z, &mut work);
                    if !v[t].is_finite() {
                        return Err(Error::Divergence { index: t });
                    }
                }
            }
        }
        Ok(v)
    }

    fn path_from(&self, eps: &[f64]) -> Result<Path> {
        let vol = self.volatility(eps)?;
        let n = self.cfg.n;
        let b = self.burn_in;
        let mu = self.cfg.transform.mu();
        let mut path = Path { x: Vec::with_capacity(n), y: Vec::with_capacity(n), v: Vec::with_capacity(n) };
        for k in 0..n {
            let t = b + k;
            let vk = vol[t - 1];
            let y = eps[t] * vk;
            path.v.push(vk);
            path.y.push(y);
            path.x.push(transform::apply_kind(&self.cfg.transform.kind, y, n) - mu);
        }
        Ok(path)
    }

    pub fn path(&self, key: &StreamKey) -> Result<Path> {
        self.path_from(&self.innovations(key))
    }

    /// `S_n / sqrt(n)`.
    pub fn normalized_sum(&self, key: &StreamKey) -> Result<f64> {
        let p = self.path(key)?;
        Ok(p.x.iter().sum::<f64>() / (self.cfg.n as f64).sqrt())
    }

    /// Base path and its coupled copy. Innovations at times `<= n - 1 - lag`
    /// (all of them for [`CouplingMode::Star`], only that one for
    /// [`CouplingMode::Prime`]) are redrawn from the stream `key.child(1)`.
    pub fn coupled(&self, lag: usize, mode: CouplingMode, key: &StreamKey) -> Result<(Path, Path)> {
        let (base, mut copies) = self.coupled_many(&[lag], mode, key)?;
        Ok((base, copies.pop().unwrap()))
    }

    /// [`Simulator::coupled`] for several lags sharing the base path.
    pub fn coupled_many(&self, lags: &[usize], mode: CouplingMode, key: &StreamKey) -> Result<(Path, Vec<Path>)> {
        let eps = self.innovations(key);
        let base = self.path_from(&eps)?;
        let mut copies = Vec::with_capacity(lags.len());
        for &lag in lags {
            copies.push(self.path_from(&self.recouple(&eps, lag, mode, key))?);
        }
        Ok((base, copies))
    }

    fn recouple(&self, eps: &[f64], lag: usize, mode: CouplingMode, key: &StreamKey) -> Vec<f64> {
        let mut alt_eps = eps.to_vec();
        // time tau sits at array position tau + burn_in - 1
        if let Some(cut) = (self.burn_in + self.cfg.n).checked_sub(2 + lag) {
            let mut stream = derive_stream(&key.child(1));
            match mode {
                CouplingMode::Star => self.sampler.fill(&mut stream, &mut alt_eps[..=cut]),
                CouplingMode::Prime => alt_eps[cut] = self.sampler.draw(&mut stream),
            }
        }
        alt_eps
    }
}

/// `(x_path, v_path)` for the stream `key`.
pub fn simulate_path(cfg: &ModelConfig, key: &StreamKey) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = Simulator::new(cfg)?.path(key)?;
    Ok((p.x, p.v))
}

/// `(x_path, x_path_coupled)`; the first component equals [`simulate_path`] for the same key.
pub fn simulate_coupled(
    cfg: &ModelConfig,
    lag: usize,
    mode: CouplingMode,
    key: &StreamKey,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b) = Simulator::new(cfg)?.coupled(lag, mode, key)?;
    Ok((a.x, b.x))
}

/// Monte Carlo estimate of `E f(Y)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenteringEstimate {
    pub mean: f64,
    pub se: f64,
    pub replicates: usize,
}

/// Mean of `f(Y_k)` over `replicates` independent stationary paths (replicate
/// `r` uses `key.child(r)`); the SE comes from the replicate-level path means.
pub fn estimate_centering(
    cfg: &ModelConfig,
    replicates: usize,
    key: &StreamKey,
    workers: usize,
) -> Result<CenteringEstimate> {
    if replicates < 1000 {
        return Err(Error::SampleSize { needed: 1000, got: replicates });
    }
    let mut raw = cfg.clone();
    raw.transform.centering = None;
    let sim = Simulator::new(&raw)?;
    let means = try_par_map(workers, replicates, |r| {
        let p = sim.path(&key.child(r as u32))?;
        Ok(p.x.iter().sum::<f64>() / p.x.len() as f64)
    })?;
    let nf = replicates as f64;
    let mean = means.iter().sum::<f64>() / nf;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(CenteringEstimate { mean, se: (var / nf).sqrt(), replicates })
}

/// `N` independent replicates of `S_n / sqrt(n)`; replicate `r` uses `key.child(r)`.
pub fn normalized_sums(sim: &Simulator, replicates: usize, key: &StreamKey, workers: usize) -> Result<Vec<f64>> {
    try_par_map(workers, replicates, |r| sim.normalized_sum(&key.child(r as u32)))
}

/// `count` draws of `Y` from the stationary law, one per independent path.
pub fn stationary_y(cfg: &ModelConfig, count: usize, key: &StreamKey, workers: usize) -> Result<Vec<f64>> {
    let sim = Simulator::new(&cfg.with_n(1))?;
    try_par_map(workers, count, |r| Ok(sim.path(&key.child(r as u32))?.y[0]))
}

#[cfg(test)]
mod tests;
