use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::error::{Error, Result};

/// `V_k = sum_{i=1}^{orders} sum_{0 <= j_1 < .. < j_i <= m_max} prod_m kappa(j_m) eps_{k-j_m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraSpec {
    pub orders: usize,
    pub kernel: Kernel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

impl VolterraSpec {
    pub fn validate(&self) -> Result<()> {
        if self.orders == 0 {
            return Err(Error::domain("Volterra series needs at least one order"));
        }
        self.kernel.validate()?;
        self.kernel.resolve_m_max(self.m_max)?;
        Ok(())
    }

    pub fn m_max(&self) -> usize {
        self.kernel.resolve_m_max(self.m_max).unwrap_or(0)
    }

    /// Tail sums `sum_{l >= k} A_{l,i}` for `k = 1..=m_max`, `i = 1..=orders`, with
    /// `A_{l,i}` the total absolute kernel weight of index sets containing `l`.
    pub fn tail_sums(&self) -> Vec<Vec<f64>> {
        let m = self.m_max();
        let abs: Vec<f64> = self.kernel.coeffs(m).iter().map(|c| c.abs()).collect();
        let orders = self.orders;
        // A_{l,i} = |kappa(l)| e_{i-1}(|kappa| without l)
        let mut a = vec![vec![0.0; orders + 1]; m + 1];
        for l in 0..=m {
            let mut e = vec![0.0; orders];
            e[0] = 1.0;
            for (j, &z) in abs.iter().enumerate() {
                if j == l {
                    continue;
                }
                for i in (1..orders).rev() {
                    e[i] += e[i - 1] * z;
                }
            }
            for i in 1..=orders {
                a[l][i] = abs[l] * e[i - 1];
            }
        }
        let mut tails = vec![vec![0.0; orders + 1]; m + 2];
        for l in (0..=m).rev() {
            for i in 1..=orders {
                tails[l][i] = tails[l + 1][i] + a[l][i];
            }
        }
        tails
    }

    /// `sum_{k>=1} k^2 (sum_i norm^i sum_{l>=k} A_{l,i})^beta` over the truncated kernel.
    pub fn summability(&self, eps_q_norm: f64, beta: f64) -> f64 {
        let tails = self.tail_sums();
        (1..tails.len())
            .map(|k| {
                let inner: f64 = (1..=self.orders).map(|i| eps_q_norm.powi(i as i32) * tails[k][i]).sum();
                (k * k) as f64 * inner.powf(beta)
            })
            .sum()
    }
}

/// Elementary symmetric polynomials `e_1..e_orders` of `z`, summed.
#[inline]
pub(crate) fn symmetric_sum(z: impl Iterator<Item = f64>, work: &mut [f64]) -> f64 {
    work.iter_mut().for_each(|w| *w = 0.0);
    work[0] = 1.0;
    let orders = work.len() - 1;
    for x in z {
        for i in (1..=orders).rev() {
            work[i] += work[i - 1] * x;
        }
    }
    work[1..].iter().sum()
}
