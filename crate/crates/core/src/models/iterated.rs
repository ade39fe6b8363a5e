use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iterated random function `V_k = F_{eps_k}(V_{k-1})` with
/// `F_e(v) = clamp(a v + b e + c sin v + d e v, v_min, v_max)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteratedSpec {
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[serde(default)]
    pub v0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

impl IteratedSpec {
    pub fn validate(&self) -> Result<()> {
        if ![self.a, self.b, self.c, self.d, self.v0].iter().all(|x| x.is_finite()) {
            return Err(Error::domain("iterated map coefficients must be finite"));
        }
        if let (Some(lo), Some(hi)) = (self.v_min, self.v_max) {
            if !(lo <= hi) {
                return Err(Error::domain(format!("clamp bounds reversed: [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn step(&self, v: f64, e: f64) -> f64 {
        let mut next = self.a * v + self.b * e + self.c * v.sin() + self.d * e * v;
        if let Some(lo) = self.v_min {
            next = next.max(lo);
        }
        if let Some(hi) = self.v_max {
            next = next.min(hi);
        }
        next
    }

    /// Lipschitz factor bound `L_e = |a| + |c| + |d| |e|` of `v -> F_e(v)`.
    #[inline]
    pub fn lipschitz(&self, e: f64) -> f64 {
        self.a.abs() + self.c.abs() + self.d.abs() * e.abs()
    }
}
