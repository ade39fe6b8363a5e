//! Deterministic, splittable random streams and exact samplers.
//!
//! A [`StreamKey`] is a master seed plus a path of indices
//! (`[experiment, replicate, ...]`). The key is hashed into a 256-bit ChaCha8
//! seed with a SplitMix64 chain, so a stream depends only on its key: replicate
//! `r` gets the same draws whether it runs first, last, or on another thread.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::numerics::special::norm_cdf;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Address of a random stream: master seed plus an index path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub master_seed: u64,
    pub path: Vec<u32>,
}

impl StreamKey {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed, path: Vec::new() }
    }

    pub fn with_path(master_seed: u64, path: &[u32]) -> Self {
        Self { master_seed, path: path.to_vec() }
    }

    /// Key one level deeper in the tree.
    pub fn child(&self, index: u32) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self { master_seed: self.master_seed, path }
    }

    fn seed_bytes(&self) -> [u8; 32] {
        let mut h = splitmix64(self.master_seed);
        for &idx in &self.path {
            // Length-prefix free: every level mixes, so [a] and [a, 0] differ.
            h = splitmix64(h ^ (u64::from(idx) + 1).wrapping_mul(GOLDEN_GAMMA));
        }
        h = splitmix64(h ^ self.path.len() as u64);
        let mut out = [0u8; 32];
        let mut s = h;
        for chunk in out.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        out
    }
}

impl fmt::Display for StreamKey {
    /// `seed:i/j/k`, the provenance string used in reports.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.master_seed)?;
        for (i, idx) in self.path.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

/// A single-owner random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl RngCore for Stream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// The stream addressed by `key`; bit-for-bit reproducible.
pub fn derive_stream(key: &StreamKey) -> Stream {
    Stream { inner: ChaCha8Rng::from_seed(key.seed_bytes()) }
}

/// Innovation and surrogate distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistSpec {
    StandardNormal,
    Uniform { a: f64, b: f64 },
    /// `Exp(rate) - 1/rate`.
    CenteredExponential { rate: f64 },
    /// `x_lo` with probability `p`, otherwise `x_hi`.
    TwoPoint { p: f64, x_lo: f64, x_hi: f64 },
    /// `x1`, `x2`, `x3` with probabilities `p1`, `p2`, `1 - p1 - p2`.
    ThreePoint { p1: f64, p2: f64, x1: f64, x2: f64, x3: f64 },
    /// Shape–rate parameterisation: density `rate^shape x^(shape-1) e^(-rate x) / Gamma(shape)`.
    Gamma { shape: f64, rate: f64 },
}

fn prob_ok(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistSpec::StandardNormal => Ok(()),
            DistSpec::Uniform { a, b } => {
                if all_finite(&[a, b]) && a < b {
                    Ok(())
                } else {
                    Err(Error::domain(format!("uniform needs finite a < b, got ({a}, {b})")))
                }
            }
            DistSpec::CenteredExponential { rate } => {
                if rate.is_finite() && rate > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("exponential rate must be > 0, got {rate}")))
                }
            }
            DistSpec::TwoPoint { p, x_lo, x_hi } => {
                if prob_ok(p) && all_finite(&[x_lo, x_hi]) {
                    Ok(())
                } else {
                    Err(Error::domain(format!("two-point needs p in [0,1] and finite atoms, got p={p}")))
                }
            }
            DistSpec::ThreePoint { p1, p2, x1, x2, x3 } => {
                let p3 = 1.0 - p1 - p2;
                if prob_ok(p1) && prob_ok(p2) && p3 >= -1e-12 && all_finite(&[x1, x2, x3]) {
                    Ok(())
                } else {
                    Err(Error::domain(format!(
                        "three-point needs probabilities in [0,1] summing to 1, got ({p1}, {p2}, {p3})"
                    )))
                }
            }
            DistSpec::Gamma { shape, rate } => {
                if shape.is_finite() && rate.is_finite() && shape > 0.0 && rate > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("gamma needs shape > 0 and rate > 0, got ({shape}, {rate})")))
                }
            }
        }
    }

    /// Atoms `(value, probability)` for discrete laws, `None` otherwise.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            DistSpec::TwoPoint { p, x_lo, x_hi } => Some(vec![(x_lo, p), (x_hi, 1.0 - p)]),
            DistSpec::ThreePoint { p1, p2, x1, x2, x3 } => {
                Some(vec![(x1, p1), (x2, p2), (x3, (1.0 - p1 - p2).max(0.0))])
            }
            _ => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.atoms().is_some()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment(2) - m * m
    }

    /// Raw moment `E X^k`, in closed form for every variant.
    pub fn moment(&self, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        match *self {
            DistSpec::StandardNormal => {
                if k % 2 == 1 {
                    0.0
                } else {
                    (1..k).step_by(2).map(f64::from).product()
                }
            }
            DistSpec::Uniform { a, b } => {
                let k1 = k as i32 + 1;
                (b.powi(k1) - a.powi(k1)) / (f64::from(k + 1) * (b - a))
            }
            DistSpec::CenteredExponential { rate } => {
                // E (Y - 1)^k for Y ~ Exp(1) is the derangement number !k.
                let (mut d0, mut d1) = (1.0_f64, 0.0_f64);
                for j in 2..=k {
                    let d2 = f64::from(j - 1) * (d1 + d0);
                    d0 = d1;
                    d1 = d2;
                }
                d1 / rate.powi(k as i32)
            }
            DistSpec::Gamma { shape, rate } => {
                (0..k).map(|i| shape + f64::from(i)).product::<f64>() / rate.powi(k as i32)
            }
            DistSpec::TwoPoint { .. } | DistSpec::ThreePoint { .. } => self
                .atoms()
                .unwrap()
                .iter()
                .map(|&(x, p)| p * x.powi(k as i32))
                .sum(),
        }
    }

    /// Absolute moment `E |X|^k`, in closed form for every variant.
    pub fn abs_moment(&self, k: u32) -> f64 {
        if k == 0 {
            return 1.0;
        }
        match *self {
            DistSpec::StandardNormal => {
                let kf = f64::from(k);
                (0.5 * kf * std::f64::consts::LN_2 + ln_gamma(0.5 * (kf + 1.0))
                    - 0.5 * std::f64::consts::PI.ln())
                .exp()
            }
            DistSpec::Uniform { a, b } => {
                let k1 = k as i32 + 1;
                let denom = f64::from(k + 1) * (b - a);
                if a >= 0.0 {
                    (b.powi(k1) - a.powi(k1)) / denom
                } else if b <= 0.0 {
                    (a.abs().powi(k1) - b.abs().powi(k1)) / denom
                } else {
                    (a.abs().powi(k1) + b.powi(k1)) / denom
                }
            }
            DistSpec::CenteredExponential { rate } => {
                // E|Y-1|^k = e^-1 (int_0^1 t^k e^t dt + k!), Y ~ Exp(1).
                let mut series = 0.0;
                let mut fact = 1.0;
                for m in 0..60u32 {
                    if m > 0 {
                        fact *= f64::from(m);
                    }
                    let term = 1.0 / (fact * f64::from(k + m + 1));
                    series += term;
                    if term < 1e-18 * series {
                        break;
                    }
                }
                let kfact: f64 = (1..=k).map(f64::from).product();
                (-1.0f64).exp() * (series + kfact) / rate.powi(k as i32)
            }
            DistSpec::Gamma { .. } => self.moment(k),
            DistSpec::TwoPoint { .. } | DistSpec::ThreePoint { .. } => self
                .atoms()
                .unwrap()
                .iter()
                .map(|&(x, p)| p * x.abs().powi(k as i32))
                .sum(),
        }
    }

    /// Closed interval outside which the law puts no mass.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DistSpec::StandardNormal => (f64::NEG_INFINITY, f64::INFINITY),
            DistSpec::Uniform { a, b } => (a, b),
            DistSpec::CenteredExponential { rate } => (-1.0 / rate, f64::INFINITY),
            DistSpec::Gamma { .. } => (0.0, f64::INFINITY),
            DistSpec::TwoPoint { .. } | DistSpec::ThreePoint { .. } => {
                let atoms = self.atoms().unwrap();
                let live = atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0);
                let lo = live.clone().fold(f64::INFINITY, f64::min);
                let hi = live.fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    /// Lebesgue density for continuous laws.
    pub fn density(&self, x: f64) -> Option<f64> {
        let d = match *self {
            DistSpec::StandardNormal => crate::numerics::norm_pdf(x),
            DistSpec::Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            DistSpec::CenteredExponential { rate } => {
                let y = x + 1.0 / rate;
                if y >= 0.0 {
                    rate * (-rate * y).exp()
                } else {
                    0.0
                }
            }
            DistSpec::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)).exp()
                }
            }
            _ => return None,
        };
        Some(d)
    }

    /// Distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistSpec::StandardNormal => norm_cdf(x),
            DistSpec::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            DistSpec::CenteredExponential { rate } => {
                let y = x + 1.0 / rate;
                if y <= 0.0 {
                    0.0
                } else {
                    -(-rate * y).exp_m1()
                }
            }
            DistSpec::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(shape, rate * x)
                }
            }
            DistSpec::TwoPoint { .. } | DistSpec::ThreePoint { .. } => self
                .atoms()
                .unwrap()
                .iter()
                .filter(|a| a.0 <= x)
                .map(|a| a.1)
                .sum::<f64>()
                .min(1.0),
        }
    }

    /// Pre-built sampler; validates the parameters once.
    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            DistSpec::StandardNormal => Sampler::Normal,
            DistSpec::Uniform { a, b } => Sampler::Uniform { a, width: b - a },
            DistSpec::CenteredExponential { rate } => Sampler::CenteredExp { rate },
            DistSpec::TwoPoint { p, x_lo, x_hi } => Sampler::TwoPoint { p, x_lo, x_hi },
            DistSpec::ThreePoint { p1, p2, x1, x2, x3 } => {
                Sampler::ThreePoint { c1: p1, c2: p1 + p2, x1, x2, x3 }
            }
            DistSpec::Gamma { shape, rate } => Sampler::Gamma(
                Gamma::new(shape, 1.0 / rate).map_err(|e| Error::domain(e.to_string()))?,
            ),
        })
    }
}

/// Validated draw routine for a [`DistSpec`].
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Normal,
    Uniform { a: f64, width: f64 },
    CenteredExp { rate: f64 },
    TwoPoint { p: f64, x_lo: f64, x_hi: f64 },
    ThreePoint { c1: f64, c2: f64, x1: f64, x2: f64, x3: f64 },
    Gamma(Gamma<f64>),
}

impl Sampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Sampler::Normal => StandardNormal.sample(rng),
            Sampler::Uniform { a, width } => a + width * rng.random::<f64>(),
            Sampler::CenteredExp { rate } => {
                let e: f64 = Exp1.sample(rng);
                (e - 1.0) / rate
            }
            Sampler::TwoPoint { p, x_lo, x_hi } => {
                if rng.random::<f64>() < p {
                    x_lo
                } else {
                    x_hi
                }
            }
            Sampler::ThreePoint { c1, c2, x1, x2, x3 } => {
                let u = rng.random::<f64>();
                if u < c1 {
                    x1
                } else if u < c2 {
                    x2
                } else {
                    x3
                }
            }
            // Marsaglia–Tsang rejection: exact.
            Sampler::Gamma(g) => g.sample(rng),
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out {
            *x = self.draw(rng);
        }
    }
}

/// `count` i.i.d. draws from `spec`.
pub fn sample(stream: &mut Stream, spec: &DistSpec, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::domain("count must be positive"));
    }
    let s = spec.sampler()?;
    let mut out = vec![0.0; count];
    s.fill(stream, &mut out);
    Ok(out)
}
