use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The map `f` in `X_k = f(Y_k) - mu_f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransformKind {
    Identity,
    /// `x - x^2/(2 sqrt n)`, and for order 3 additionally `- (2/3) x^3 / n`.
    Compensator { order: u8 },
    /// `|x|^r`, or `sign(x) |x|^r` when `signed`.
    Power { r: f64, signed: bool },
    /// `sum_j coeffs[j] x^j`.
    Polynomial { coeffs: Vec<f64> },
}

/// Constants of the class `|f(x) - f(y)| <= L |x-y|^hBeta (1 + |x|^hAlpha + |y|^hAlpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderSpec {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "hAlpha")]
    pub h_alpha: f64,
    #[serde(rename = "hBeta")]
    pub h_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    #[serde(flatten)]
    pub kind: TransformKind,
    /// Declared Hölder constants; derived from the variant when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<HolderSpec>,
    /// `mu_f = E f(Y)`. `None` means not yet determined and is treated as 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centering: Option<f64>,
}

impl TransformSpec {
    pub fn new(kind: TransformKind) -> Self {
        Self { kind, holder: None, centering: None }
    }

    pub fn identity() -> Self {
        Self::new(TransformKind::Identity)
    }

    pub fn compensator(order: u8) -> Self {
        Self::new(TransformKind::Compensator { order })
    }

    pub fn with_centering(mut self, mu: f64) -> Self {
        self.centering = Some(mu);
        self
    }

    pub fn mu(&self) -> f64 {
        self.centering.unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            TransformKind::Identity => {}
            TransformKind::Compensator { order } => {
                if !matches!(order, 2 | 3) {
                    return Err(Error::domain(format!("compensator order must be 2 or 3, got {order}")));
                }
            }
            TransformKind::Power { r, .. } => {
                if !(r.is_finite() && *r > 0.0) {
                    return Err(Error::domain(format!("power exponent must be > 0, got {r}")));
                }
            }
            TransformKind::Polynomial { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::domain("polynomial transform needs finite coefficients"));
                }
            }
        }
        if let Some(h) = &self.holder {
            if !(h.l > 0.0 && h.h_alpha >= 0.0 && h.h_beta > 0.0) {
                return Err(Error::domain("Hölder constants need L > 0, hAlpha >= 0, hBeta > 0"));
            }
        }
        if let Some(mu) = self.centering {
            if !mu.is_finite() {
                return Err(Error::domain("centering must be finite"));
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.kind == TransformKind::Identity
    }

    /// Declared constants, or a valid choice derived from the variant.
    pub fn holder_constants(&self, n: usize) -> HolderSpec {
        self.holder.unwrap_or_else(|| derived_holder(&self.kind, n))
    }
}

fn derived_holder(kind: &TransformKind, n: usize) -> HolderSpec {
    let nf = n.max(1) as f64;
    match kind {
        TransformKind::Identity => HolderSpec { l: 1.0, h_alpha: 0.0, h_beta: 1.0 },
        TransformKind::Compensator { order: 2 } => HolderSpec { l: 1.0, h_alpha: 1.0, h_beta: 1.0 },
        TransformKind::Compensator { .. } => {
            HolderSpec { l: 1.0 + 0.5 / nf.sqrt() + 1.0 / nf, h_alpha: 2.0, h_beta: 1.0 }
        }
        TransformKind::Power { r, signed } => {
            if *r <= 1.0 {
                HolderSpec { l: if *signed { 2.0 } else { 1.0 }, h_alpha: 0.0, h_beta: *r }
            } else {
                HolderSpec { l: *r, h_alpha: r - 1.0, h_beta: 1.0 }
            }
        }
        TransformKind::Polynomial { coeffs } => {
            let deg = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
            let l: f64 = coeffs.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c.abs()).sum();
            HolderSpec { l: l.max(f64::MIN_POSITIVE), h_alpha: deg.saturating_sub(1) as f64, h_beta: 1.0 }
        }
    }
}

/// `f(y)` for horizon `n`, without centering.
#[inline]
pub fn apply_transform(t: &TransformSpec, y: f64, n: usize) -> f64 {
    apply_kind(&t.kind, y, n)
}

#[inline]
pub(crate) fn apply_kind(kind: &TransformKind, y: f64, n: usize) -> f64 {
    match kind {
        TransformKind::Identity => y,
        TransformKind::Compensator { order } => {
            let nf = n as f64;
            let mut v = y - y * y / (2.0 * nf.sqrt());
            if *order == 3 {
                v -= 2.0 * y * y * y / (3.0 * nf);
            }
            v
        }
        TransformKind::Power { r, signed } => {
            let m = y.abs().powf(*r);
            if *signed {
                m.copysign(y)
            } else {
                m
            }
        }
        TransformKind::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c),
    }
}

/// Largest ratio `|f(x)-f(y)| / (L |x-y|^hBeta (1 + |x|^hAlpha + |y|^hAlpha))` over the pairs.
///
/// The inequality holds on the sample iff the result is at most 1.
pub fn holder_ratio(t: &TransformSpec, n: usize, pairs: &[(f64, f64)]) -> f64 {
    let h = t.holder_constants(n);
    pairs
        .iter()
        .filter(|(x, y)| x != y)
        .map(|&(x, y)| {
            let lhs = (apply_transform(t, x, n) - apply_transform(t, y, n)).abs();
            let rhs = h.l * (x - y).abs().powf(h.h_beta) * (1.0 + x.abs().powf(h.h_alpha) + y.abs().powf(h.h_alpha));
            lhs / rhs
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_evaluations() {
        assert_eq!(apply_transform(&TransformSpec::identity(), 3.5, 10), 3.5);
        assert_eq!(apply_transform(&TransformSpec::compensator(2), 1.0, 4), 0.75);
        assert!((apply_transform(&TransformSpec::compensator(3), 1.0, 1) + 1.0 / 6.0).abs() < 1e-15);
        let p = TransformSpec::new(TransformKind::Polynomial { coeffs: vec![1.0, 0.0, 2.0] });
        assert_eq!(apply_transform(&p, 3.0, 1), 19.0);
        let s = TransformSpec::new(TransformKind::Power { r: 2.0, signed: true });
        assert_eq!(apply_transform(&s, -3.0, 1), -9.0);
    }

    #[test]
    fn derived_constants_hold_on_a_grid() {
        let kinds = [
            TransformKind::Identity,
            TransformKind::Compensator { order: 2 },
            TransformKind::Compensator { order: 3 },
            TransformKind::Power { r: 0.5, signed: true },
            TransformKind::Power { r: 0.5, signed: false },
            TransformKind::Power { r: 2.5, signed: true },
            TransformKind::Polynomial { coeffs: vec![0.3, -1.0, 0.5, 0.25] },
        ];
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.37).collect();
        let pairs: Vec<(f64, f64)> = grid.iter().flat_map(|&x| grid.iter().map(move |&y| (x, y))).collect();
        for kind in kinds {
            for n in [1, 4, 100] {
                let t = TransformSpec::new(kind.clone());
                let r = holder_ratio(&t, n, &pairs);
                assert!(r <= 1.0 + 1e-12, "{kind:?} n={n} ratio {r}");
            }
        }
    }

    #[test]
    fn serde_shape() {
        let t: TransformSpec =
            serde_json::from_str(r#"{"kind":"compensator","order":3,"centering":-0.25}"#).unwrap();
        assert_eq!(t.kind, TransformKind::Compensator { order: 3 });
        assert_eq!(t.mu(), -0.25);
    }
}
