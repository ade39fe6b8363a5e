//! Distances between the empirical law of `S_n / sqrt(n)` and its
//! approximants, plus characteristic-function diagnostics.

pub use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, integrate, sine_integral, QuadConfig};
use crate::parallel::par_map;

/// Interior points evaluated per gap between order statistics.
pub const DEFAULT_REFINE: usize = 8;

/// Which approximation a metric row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Edgeworth,
    Surrogate,
    Gaussian,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Edgeworth => "edgeworth",
            Target::Surrogate => "surrogate",
            Target::Gaussian => "gaussian",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub kolmogorov: f64,
    pub wasserstein1: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub replicates: usize,
    pub target: Target,
    pub seed_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cf_scan: Option<CfScan>,
}

fn check_sorted(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::Contract("sample must be non-empty".into()));
    }
    if let Some(i) = sample.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(Error::Contract(format!("sample not sorted at index {}", i + 1)));
    }
    Ok(())
}

/// Sorted copy with NaNs rejected.
pub fn sorted(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::Contract("sample contains NaN".into()));
    }
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// `sup_x |F_N(x) - F(x)|`, evaluated at the order statistics and at
/// `refine` interior points of each gap (which matters for signed targets).
pub fn kolmogorov_distance<F>(sample: &[f64], target_cdf: F, refine: usize) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    check_sorted(sample)?;
    let nf = sample.len() as f64;
    const CHUNK: usize = 4096;
    let chunks = sample.len().div_ceil(CHUNK);
    let parts = par_map(0, chunks, |c| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(sample.len());
        let mut worst = 0.0f64;
        for i in start..end {
            let x = sample[i];
            let f = target_cdf(x);
            let above = (i + 1) as f64 / nf;
            let below = i as f64 / nf;
            worst = worst.max((above - f).abs()).max((below - f).abs());
            if refine > 0 && i + 1 < sample.len() {
                let next = sample[i + 1];
                if next > x {
                    for j in 1..=refine {
                        let t = x + (next - x) * j as f64 / (refine + 1) as f64;
                        worst = worst.max((above - target_cdf(t)).abs());
                    }
                }
            }
        }
        worst
    });
    Ok(parts.into_iter().fold(0.0, f64::max))
}

const COVERAGE_TOL: f64 = 1e-8;

struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    check_nodes: Vec<f64>,
    check_weights: Vec<f64>,
}

impl PanelRule {
    fn new() -> Self {
        let (nodes, weights) = gauss_legendre(5);
        let (check_nodes, check_weights) = gauss_legendre(3);
        Self { nodes, weights, check_nodes, check_weights }
    }
}

/// `int_a^b (F(x) - level) dx` on a panel where the sign does not change.
fn panel_integral<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, level: f64, rule: &PanelRule) -> Result<f64> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let gl = |nodes: &[f64], weights: &[f64]| -> f64 {
        nodes.iter().zip(weights).map(|(t, w)| w * (f(mid + half * t) - level)).sum::<f64>() * half
    };
    let fine = gl(&rule.nodes, &rule.weights);
    let coarse = gl(&rule.check_nodes, &rule.check_weights);
    if (fine - coarse).abs() <= 1e-13 + 1e-9 * (b - a) {
        return Ok(fine);
    }
    let cfg = QuadConfig { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 500 };
    Ok(integrate(|x| f(x) - level, a, b, &[], &cfg)?.value)
}

/// `int_a^b |F(x) - level| dx`, splitting at a sign change of `F - level`.
fn abs_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fb: f64, level: f64, rule: &PanelRule) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let (da, db) = (fa - level, fb - level);
    if da * db >= 0.0 {
        return Ok(panel_integral(f, a, b, level, rule)?.abs());
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) - level) * da > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    Ok(panel_integral(f, a, c, level, rule)?.abs() + panel_integral(f, c, b, level, rule)?.abs())
}

/// `int_lo^hi |F_N(x) - F(x)| dx`, which is W1 when `[lo, hi]` covers both laws.
pub fn wasserstein1_cdf<F>(sample: &[f64], target_cdf: F, range: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    check_sorted(sample)?;
    let (lo, hi) = range;
    let n = sample.len();
    let (first, last) = (sample[0], sample[n - 1]);
    if !(lo <= first && hi >= last) {
        return Err(Error::Coverage(format!("[{lo}, {hi}] does not contain the sample range [{first}, {last}]")));
    }
    let (f_lo, f_hi) = (target_cdf(lo), target_cdf(hi));
    if f_lo.abs() > COVERAGE_TOL || (1.0 - f_hi).abs() > COVERAGE_TOL {
        return Err(Error::Coverage(format!("target CDF is {f_lo:e} at {lo} and 1 - {:e} at {hi}", 1.0 - f_hi)));
    }
    let nf = n as f64;
    let tail_cfg = QuadConfig { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 4000 };
    let left = integrate(|x| target_cdf(x).abs(), lo, first, &[], &tail_cfg)?.value;
    let right = integrate(|x| (1.0 - target_cdf(x)).abs(), last, hi, &[], &tail_cfg)?.value;

    const CHUNK: usize = 2048;
    let chunks = (n - 1).div_ceil(CHUNK);
    let parts = par_map(0, chunks, |c| -> Result<f64> {
        let rule = PanelRule::new();
        let start = c * CHUNK;
        let end = (start + CHUNK).min(n - 1);
        let mut acc = 0.0;
        let mut fa = target_cdf(sample[start]);
        for i in start..end {
            let (a, b) = (sample[i], sample[i + 1]);
            let fb = target_cdf(b);
            acc += abs_panel(&target_cdf, a, b, fa, fb, (i + 1) as f64 / nf, &rule)?;
            fa = fb;
        }
        Ok(acc)
    });
    let mut total = left + right;
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// Mean absolute difference of the order statistics of two equal-size samples.
pub fn wasserstein1_samples(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!("sample lengths differ: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::Contract("samples must be non-empty".into()));
    }
    let (sa, sb) = (sorted(a)?, sorted(b)?);
    Ok(sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// Empirical characteristic function at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfPoint {
    pub xi: f64,
    pub value: Complex64,
    pub modulus: f64,
    /// `1/sqrt(N)` error bar on the modulus.
    pub se: f64,
}

/// `N^-1 sum_j exp(i xi x_j)` at a single frequency.
pub fn empirical_cf_at(sample: &[f64], xi: f64) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for &x in sample {
        let (s, c) = (xi * x).sin_cos();
        re += c;
        im += s;
    }
    let nf = sample.len() as f64;
    Complex64::new(re / nf, im / nf)
}

pub fn empirical_cf(sample: &[f64], xi_grid: &[f64]) -> Result<Vec<CfPoint>> {
    if sample.is_empty() {
        return Err(Error::Contract("sample must be non-empty".into()));
    }
    if xi_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("frequency grid must be finite"));
    }
    let se = 1.0 / (sample.len() as f64).sqrt();
    Ok(par_map(0, xi_grid.len(), |k| {
        let xi = xi_grid[k];
        let value = empirical_cf_at(sample, xi);
        CfPoint { xi, value, modulus: value.norm(), se }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfScan {
    pub sup_modulus: f64,
    pub argmax_xi: f64,
    pub grid: Vec<f64>,
    pub moduli: Vec<f64>,
}

/// Largest empirical CF modulus over a uniform grid of `grid_size` points on `[a, b]`.
pub fn cf_sup_scan(sample: &[f64], a: f64, b: f64, grid_size: usize) -> Result<CfScan> {
    if grid_size < 64 {
        return Err(Error::domain(format!("grid_size must be at least 64, got {grid_size}")));
    }
    if !(a > 0.0 && b > a) {
        return Err(Error::domain(format!("need 0 < a < b, got [{a}, {b}]")));
    }
    let grid: Vec<f64> = (0..grid_size).map(|k| a + (b - a) * k as f64 / (grid_size - 1) as f64).collect();
    let pts = empirical_cf(sample, &grid)?;
    let moduli: Vec<f64> = pts.iter().map(|p| p.modulus).collect();
    let (k, &sup) = moduli
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(CfScan { sup_modulus: sup, argmax_xi: grid[k], grid, moduli })
}

/// Berry–Esseen tail over `a <= |xi| <= b`.
///
/// For a characteristic function (`cf(-xi) = conj cf(xi)`) the integral
/// `int e^{-i xi x} cf(xi) (1 - |xi|/b) / xi dxi` is purely imaginary; the
/// returned value `R` is its imaginary part,
/// `R = 2 int_a^b Im(e^{-i xi x} cf(xi)) (1 - xi/b) / xi dxi`.
pub fn berry_esseen_tail<C>(cf: C, a: f64, b: f64, x: f64) -> Result<f64>
where
    C: Fn(f64) -> Complex64,
{
    if !(a >= 0.0 && b >= a && b.is_finite()) {
        return Err(Error::domain(format!("need 0 <= a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let panels = (((b - a) * (x.abs() + 1.0) / std::f64::consts::PI).ceil() as usize).clamp(1, 4000);
    let breaks: Vec<f64> = (1..panels).map(|k| a + (b - a) * k as f64 / panels as f64).collect();
    let cfg = QuadConfig { abs_tol: 1e-10, rel_tol: 1e-12, max_intervals: 20_000 };
    let integrand = |xi: f64| {
        let w = Complex64::from_polar(1.0, -xi * x) * cf(xi);
        w.im * (1.0 - xi / b) / xi
    };
    Ok(2.0 * integrate(integrand, a, b, &breaks, &cfg)?.value)
}

/// [`berry_esseen_tail`] for the empirical CF of `sample`, in closed form:
/// `(2/N) sum_j [Si(b u) - Si(a u) - (cos(a u) - cos(b u)) / (b u)]`, `u = x_j - x`.
pub fn berry_esseen_tail_sample(sample: &[f64], a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= a && b.is_finite()) {
        return Err(Error::domain(format!("need 0 <= a <= b, got [{a}, {b}]")));
    }
    if sample.is_empty() {
        return Err(Error::Contract("sample must be non-empty".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let sum: f64 = sample
        .iter()
        .map(|&xj| {
            let u = xj - x;
            if u == 0.0 {
                0.0
            } else {
                sine_integral(b * u) - sine_integral(a * u) - ((a * u).cos() - (b * u).cos()) / (b * u)
            }
        })
        .sum();
    Ok(2.0 * sum / sample.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeCharacteristic {
    /// `min_b (max_x |R_b(x)| + 1/b)`.
    pub value: f64,
    pub best_b: f64,
    /// `(b, max_x |R_b(x)|)` per grid point.
    pub sup_by_b: Vec<(f64, f64)>,
}

/// `{2^j a : j = 0..=10}`.
pub fn default_b_grid(a: f64) -> Vec<f64> {
    (0..=10).map(|j| a * f64::from(1u32 << j)).collect()
}

/// 129 uniform points over `[-8 s, 8 s]`.
pub fn default_x_grid(s: f64) -> Vec<f64> {
    (0..129).map(|k| -8.0 * s + 16.0 * s * k as f64 / 128.0).collect()
}

fn characteristic_with<T>(tail: T, a: f64, b_grid: &[f64], x_grid: &[f64]) -> Result<BeCharacteristic>
where
    T: Fn(f64, f64) -> Result<f64> + Sync,
{
    if b_grid.is_empty() || x_grid.is_empty() {
        return Err(Error::domain("grids must be non-empty"));
    }
    if b_grid.windows(2).any(|w| !(w[0] < w[1])) || b_grid[0] < a {
        return Err(Error::domain("b_grid must be increasing and at least a"));
    }
    let mut sup_by_b = Vec::with_capacity(b_grid.len());
    for &b in b_grid {
        let tails = par_map(0, x_grid.len(), |k| tail(b, x_grid[k]));
        let mut sup = 0.0f64;
        for t in tails {
            sup = sup.max(t?.abs());
        }
        sup_by_b.push((b, sup));
    }
    let (best_b, value) = sup_by_b
        .iter()
        .map(|&(b, s)| (b, s + 1.0 / b))
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Ok(BeCharacteristic { value, best_b, sup_by_b })
}

/// Berry–Esseen characteristic `min_b (max_x |tail| + 1/b)` for a CF evaluator.
pub fn berry_esseen_characteristic<C>(cf: C, a: f64, b_grid: &[f64], x_grid: &[f64]) -> Result<BeCharacteristic>
where
    C: Fn(f64) -> Complex64 + Sync,
{
    characteristic_with(|b, x| berry_esseen_tail(&cf, a, b, x), a, b_grid, x_grid)
}

/// Berry–Esseen characteristic for the empirical CF of a sample.
pub fn berry_esseen_characteristic_sample(
    sample: &[f64],
    a: f64,
    b_grid: &[f64],
    x_grid: &[f64],
) -> Result<BeCharacteristic> {
    characteristic_with(|b, x| berry_esseen_tail_sample(sample, a, b, x), a, b_grid, x_grid)
}

/// Mean and batch-means standard error of per-batch statistics.
pub fn batch_mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}
