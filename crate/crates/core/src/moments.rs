//! Cumulant estimation for `T = S_n / sqrt(n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rngkit::DistSpec;

/// Enumeration budget for [`exact_cumulants_discrete`].
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

/// Estimated `s_n^2 = E T^2` and `kappa_n^3 = E T^3` with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantEstimate {
    pub s2: f64,
    pub k3: f64,
    /// Long-run variance, when it has been estimated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lrv: Option<f64>,
    pub se_s2: f64,
    pub se_k3: f64,
    #[serde(rename = "N")]
    pub replicates: usize,
    pub n: usize,
    /// All replicates were equal, so the variance estimate is degenerate.
    pub degenerate: bool,
}

impl CumulantEstimate {
    /// Exact cumulants with zero standard errors (for oracle inputs).
    pub fn exact(s2: f64, k3: f64, n: usize) -> Self {
        Self { s2, k3, lrv: None, se_s2: 0.0, se_k3: 0.0, replicates: 0, n, degenerate: s2 <= 0.0 }
    }

    pub fn s(&self) -> f64 {
        self.s2.sqrt()
    }

    /// `s2 > 0`, required by the expansion and the surrogate.
    pub fn check_positive(&self) -> Result<()> {
        if self.s2 > 0.0 && !self.degenerate {
            Ok(())
        } else {
            Err(Error::domain(format!("s_n^2 must be positive, got {} (degenerate: {})", self.s2, self.degenerate)))
        }
    }
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, count: usize) -> (f64, f64) {
    let nf = count as f64;
    let mean = values.clone().sum::<f64>() / nf;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Sample means of `T^2` and `T^3` over independent replicates `sums` of `T`.
pub fn estimate_cumulants(sums: &[f64], n: usize) -> Result<CumulantEstimate> {
    const MIN: usize = 100;
    if sums.len() < MIN {
        return Err(Error::SampleSize { needed: MIN, got: sums.len() });
    }
    let count = sums.len();
    let (s2, se_s2) = mean_and_se(sums.iter().map(|t| t * t), count);
    let (k3, se_k3) = mean_and_se(sums.iter().map(|t| t * t * t), count);
    let degenerate = sums.iter().all(|&t| t == sums[0]);
    Ok(CumulantEstimate { s2, k3, lrv: None, se_s2, se_k3, replicates: count, n, degenerate })
}

/// Exact `(s_n^2, kappa_n^3)` for i.i.d. `X_k` with the discrete law `spec`,
/// by enumerating all `atoms^n` outcomes.
pub fn exact_cumulants_discrete(spec: &DistSpec, n: usize) -> Result<(f64, f64)> {
    spec.validate()?;
    let atoms = spec.atoms().ok_or_else(|| Error::domain("exact cumulants need a discrete law"))?;
    if n == 0 {
        return Err(Error::domain("horizon n must be positive"));
    }
    let size = (atoms.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if atoms.len() > 4 || size > ENUMERATION_BUDGET {
        return Err(Error::Capacity { size, budget: ENUMERATION_BUDGET });
    }
    let k = atoms.len();
    let mut idx = vec![0usize; n];
    let (mut m2, mut m3) = (0.0, 0.0);
    loop {
        let mut s = 0.0;
        let mut p = 1.0;
        for &i in &idx {
            s += atoms[i].0;
            p *= atoms[i].1;
        }
        m2 += p * s * s;
        m3 += p * s * s * s;
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                let nf = n as f64;
                return Ok((m2 / nf, m3 / nf.powf(1.5)));
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Bartlett lag-window estimate of the long-run variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRunVariance {
    pub value: f64,
    /// Asymptotic standard error `|value| sqrt(4B / (3 len))`.
    pub se: f64,
    pub bandwidth: usize,
    /// The estimate is negative; it is returned as computed, never clamped.
    pub negative: bool,
}

/// `ceil(len^(1/3))`.
pub fn default_bandwidth(len: usize) -> usize {
    let mut b = (len as f64).cbrt().ceil() as usize;
    while b.pow(3) < len {
        b += 1;
    }
    while b > 1 && (b - 1).pow(3) >= len {
        b -= 1;
    }
    b.max(1)
}

/// `gamma_0 + 2 sum_{k=1}^{B} (1 - k/(B+1)) gamma_k` with sample autocovariances.
pub fn longrun_variance(path: &[f64], bandwidth: usize) -> Result<LongRunVariance> {
    let len = path.len();
    if bandwidth == 0 || 4 * bandwidth >= len {
        return Err(Error::domain(format!("bandwidth {bandwidth} must lie in [1, len/4) for length {len}")));
    }
    let nf = len as f64;
    let mean = path.iter().sum::<f64>() / nf;
    let c: Vec<f64> = path.iter().map(|x| x - mean).collect();
    let acov = |k: usize| c.iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / nf;
    let mut value = acov(0);
    for k in 1..=bandwidth {
        value += 2.0 * (1.0 - k as f64 / (bandwidth as f64 + 1.0)) * acov(k);
    }
    let se = value.abs() * (4.0 * bandwidth as f64 / (3.0 * nf)).sqrt();
    Ok(LongRunVariance { value, se, bandwidth, negative: value < 0.0 })
}
