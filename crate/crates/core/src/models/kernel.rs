use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient sequence `a_0, a_1, ...` of a linear filter or a separable
/// Volterra kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Kernel {
    /// `a_i = r^i`.
    Geometric { r: f64 },
    /// `a_i = (1 + i)^(-theta)`.
    Polynomial { theta: f64 },
    /// Explicit truncated list.
    List { coeffs: Vec<f64> },
}

/// Summability diagnostics for a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    /// The weighted sum being tested; infinite if it diverges.
    pub weighted_sum: f64,
    pub summable: bool,
    /// `sum_{i > m_max} |a_i|`, the part dropped by truncation.
    pub truncation_tail: f64,
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Geometric { r } if r.is_finite() && r.abs() < 1.0 => Ok(()),
            Kernel::Geometric { r } => Err(Error::domain(format!("geometric kernel needs |r| < 1, got {r}"))),
            Kernel::Polynomial { theta } if theta.is_finite() && *theta > 1.0 => Ok(()),
            Kernel::Polynomial { theta } => {
                Err(Error::domain(format!("polynomial kernel needs theta > 1, got {theta}")))
            }
            Kernel::List { coeffs } if !coeffs.is_empty() && coeffs.iter().all(|c| c.is_finite()) => Ok(()),
            Kernel::List { .. } => Err(Error::domain("kernel list must be non-empty and finite")),
        }
    }

    #[inline]
    pub fn coeff(&self, i: usize) -> f64 {
        match self {
            Kernel::Geometric { r } => r.powi(i as i32),
            Kernel::Polynomial { theta } => (1.0 + i as f64).powf(-theta),
            Kernel::List { coeffs } => coeffs.get(i).copied().unwrap_or(0.0),
        }
    }

    /// Truncation lag: explicit `m_max`, or the list length for explicit kernels.
    pub fn resolve_m_max(&self, m_max: Option<usize>) -> Result<usize> {
        match (self, m_max) {
            (_, Some(m)) => Ok(m),
            (Kernel::List { coeffs }, None) => Ok(coeffs.len() - 1),
            _ => Err(Error::domain("closed-form kernels need an explicit truncation m_max")),
        }
    }

    /// `a_0..=a_{m_max}`.
    pub fn coeffs(&self, m_max: usize) -> Vec<f64> {
        (0..=m_max).map(|i| self.coeff(i)).collect()
    }

    /// `sum_{i > m_max} |a_i|`.
    pub fn tail_abs_sum(&self, m_max: usize) -> f64 {
        match self {
            Kernel::Geometric { r } => {
                let r = r.abs();
                r.powi(m_max as i32 + 1) / (1.0 - r)
            }
            Kernel::Polynomial { theta } => {
                // integral bound: sum_{i > m} (1+i)^-t <= int_{m+1}^inf x^-t dx + (m+2)^-t
                let m = m_max as f64;
                (m + 1.0).powf(1.0 - theta) / (theta - 1.0)
            }
            Kernel::List { coeffs } => coeffs.iter().skip(m_max + 1).map(|c| c.abs()).sum(),
        }
    }

    /// `sum_{k >= 1} k^2 |a_k|^x`, the linear-process summability condition.
    pub fn weighted_power_sum(&self, x: f64, m_max: usize) -> KernelCheck {
        let truncation_tail = self.tail_abs_sum(m_max);
        let (weighted_sum, summable) = match self {
            Kernel::Geometric { r } => {
                let rho = r.abs().powf(x);
                if rho == 0.0 {
                    (0.0, true)
                } else {
                    (rho * (1.0 + rho) / (1.0 - rho).powi(3), rho < 1.0)
                }
            }
            Kernel::Polynomial { theta } => {
                let e = theta * x;
                if e <= 3.0 {
                    (f64::INFINITY, false)
                } else {
                    let head: f64 = (1..=10_000).map(|k| (k * k) as f64 * (1.0 + k as f64).powf(-e)).sum();
                    // k^2 (1+k)^-e <= (1+k)^(2-e); tail integral from 10_001
                    let tail = 10_001f64.powf(3.0 - e) / (e - 3.0);
                    (head + tail, true)
                }
            }
            Kernel::List { coeffs } => (
                coeffs.iter().enumerate().skip(1).map(|(k, a)| (k * k) as f64 * a.abs().powf(x)).sum(),
                true,
            ),
        };
        KernelCheck { weighted_sum, summable, truncation_tail }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_weighted_sum_matches_series() {
        let k = Kernel::Geometric { r: 0.5 };
        let direct: f64 = (1..200).map(|i| (i * i) as f64 * 0.5f64.powi(i)).sum();
        let c = k.weighted_power_sum(1.0, 10);
        assert!((c.weighted_sum - direct).abs() < 1e-10);
        assert!((c.truncation_tail - 0.5f64.powi(11) * 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_condition() {
        assert!(!Kernel::Polynomial { theta: 2.0 }.weighted_power_sum(1.0, 10).summable);
        assert!(Kernel::Polynomial { theta: 5.0 }.weighted_power_sum(1.0, 10).summable);
    }
}
