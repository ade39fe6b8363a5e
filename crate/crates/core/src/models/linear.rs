use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::error::{Error, Result};

/// Inner map `c(x)` applied to each innovation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerMap {
    Identity,
    Square,
    Abs,
}

impl InnerMap {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            InnerMap::Identity => x,
            InnerMap::Square => x * x,
            InnerMap::Abs => x.abs(),
        }
    }
}

/// Outer map `g` with `V = g(G)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OuterMap {
    Identity,
    Abs,
    /// `shift + |x|`
    ShiftedAbs { shift: f64 },
    /// `|x|^r`
    Power { r: f64 },
}

/// Hölder constants `(L_g, gamma, delta)` of the outer map, in the same
/// convention as the transform class: `|g(x)-g(y)| <= L |x-y|^delta (1 + |x|^gamma + |y|^gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterHolder {
    pub l: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl OuterMap {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            OuterMap::Identity => x,
            OuterMap::Abs => x.abs(),
            OuterMap::ShiftedAbs { shift } => shift + x.abs(),
            OuterMap::Power { r } => x.abs().powf(r),
        }
    }

    pub fn holder(self) -> OuterHolder {
        match self {
            OuterMap::Identity | OuterMap::Abs | OuterMap::ShiftedAbs { .. } => {
                OuterHolder { l: 1.0, gamma: 0.0, delta: 1.0 }
            }
            OuterMap::Power { r } if r <= 1.0 => OuterHolder { l: 1.0, gamma: 0.0, delta: r },
            OuterMap::Power { r } => OuterHolder { l: r, gamma: r - 1.0, delta: 1.0 },
        }
    }
}

/// `G_k = sum_{i=0}^{m_max} a_i c(eps_{k-i})`, `V_k = g(G_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSpec {
    pub kernel: Kernel,
    pub inner: InnerMap,
    pub outer: OuterMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

impl LinearSpec {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.kernel.resolve_m_max(self.m_max)?;
        match self.outer {
            OuterMap::ShiftedAbs { shift } if !(shift.is_finite() && shift >= 0.0) => {
                Err(Error::domain("shifted-abs outer map needs a finite shift >= 0"))
            }
            OuterMap::Power { r } if !(r.is_finite() && r > 0.0) => {
                Err(Error::domain("power outer map needs r > 0"))
            }
            _ => Ok(()),
        }
    }

    pub fn m_max(&self) -> usize {
        self.kernel.resolve_m_max(self.m_max).unwrap_or(0)
    }
}
