//! Numerical checks of the dependence, contraction, Hölder and non-lattice
//! conditions for a configured model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    apply_transform, CouplingMode, Family, GarchSpec, HolderSpec, IteratedSpec, ModelConfig, Simulator,
    TransformKind,
};
use crate::numerics::{integrate, linear_fit, LinearFit, QuadConfig};
use crate::parallel::{par_map, try_par_map};
use crate::rngkit::{derive_stream, DistSpec, StreamKey};

/// Draws used by the Monte Carlo fallbacks of [`gamma_c`] and [`contraction_coefficient`].
pub const DEFAULT_MC_DRAWS: usize = 1_000_000;
/// Largest `N_outer * N_inner` accepted by [`nonlattice_check`].
pub const NONLATTICE_BUDGET: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Informational, no hard assertion.
    Flag,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Flag => "flag",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    Exact,
    MonteCarlo,
}

/// Which coordinate the dependence profile compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// Transformed observation `X_n`.
    X,
    /// Raw observation `Y_n`.
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagEstimate {
    pub lag: usize,
    pub theta_hat: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceProfile {
    pub p: f64,
    pub observable: Observable,
    pub lags: Vec<LagEstimate>,
    /// Fit of `ln theta_hat` against the lag over lags with `theta_hat > 5 SE`.
    pub fit: Option<LinearFit>,
    /// Every coupled difference was exactly zero.
    pub degenerate: bool,
    #[serde(rename = "N")]
    pub replicates: usize,
    pub seed_path: String,
}

/// `(N^-1 sum |Z_n - Z*_n|^p)^(1/p)` per lag from star-coupled paths.
///
/// Replicate `r` uses `key.child(r)` for every lag, so all lags share the
/// base path. The SE follows from the delta method.
pub fn dependence_profile(
    cfg: &ModelConfig,
    p: f64,
    lags: &[usize],
    replicates: usize,
    key: &StreamKey,
    workers: usize,
    observable: Observable,
) -> Result<DependenceProfile> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::domain(format!("moment exponent p must be >= 1, got {p}")));
    }
    if replicates < 1000 {
        return Err(Error::SampleSize { needed: 1000, got: replicates });
    }
    if lags.is_empty() {
        return Err(Error::domain("lag list must be non-empty"));
    }
    let sim = Simulator::new(cfg)?;
    let last = cfg.n - 1;
    let pick = |path: &crate::models::Path| match observable {
        Observable::X => path.x[last],
        Observable::Y => path.y[last],
    };
    let diffs = try_par_map(workers, replicates, |r| {
        let (base, copies) = sim.coupled_many(lags, CouplingMode::Star, &key.child(r as u32))?;
        let b = pick(&base);
        Ok(copies.iter().map(|c| (b - pick(c)).abs()).collect::<Vec<f64>>())
    })?;
    let nf = replicates as f64;
    let mut degenerate = true;
    let mut out = Vec::with_capacity(lags.len());
    for (j, &lag) in lags.iter().enumerate() {
        let pw: Vec<f64> = diffs.iter().map(|d| d[j].powf(p)).collect();
        degenerate &= pw.iter().all(|&v| v == 0.0);
        let m = pw.iter().sum::<f64>() / nf;
        let var = pw.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (nf - 1.0);
        let se_m = (var / nf).sqrt();
        let theta_hat = m.powf(1.0 / p);
        let se = if m > 0.0 { m.powf(1.0 / p - 1.0) / p * se_m } else { 0.0 };
        out.push(LagEstimate { lag, theta_hat, se });
    }
    let fit = if degenerate {
        None
    } else {
        let usable: Vec<&LagEstimate> = out.iter().filter(|e| e.theta_hat > 5.0 * e.se && e.theta_hat > 0.0).collect();
        if usable.len() >= 2 {
            let x: Vec<f64> = usable.iter().map(|e| e.lag as f64).collect();
            let y: Vec<f64> = usable.iter().map(|e| e.theta_hat.ln()).collect();
            linear_fit(&x, &y).ok()
        } else {
            None
        }
    };
    Ok(DependenceProfile { p, observable, lags: out, fit, degenerate, replicates, seed_path: key.to_string() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaC {
    pub value: f64,
    /// Standard error; zero for closed-form evaluation.
    pub se: f64,
    /// `||c_i(eps)||_q` per coefficient.
    pub terms: Vec<f64>,
    pub q: f64,
    pub method: Method,
    pub stationary: bool,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * f64::from(n - j) / f64::from(j + 1))
}

fn integer_exponent(q: f64) -> Option<u32> {
    (q.fract() == 0.0 && q <= 64.0).then_some(q as u32)
}

fn check_exponent(q: f64) -> Result<()> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::domain(format!("norm exponent q must be >= 1, got {q}")));
    }
    Ok(())
}

fn require_abs_moment(innovation: &DistSpec, order: f64) -> Result<()> {
    let k = order.ceil() as u32;
    if !innovation.abs_moment(k).is_finite() {
        return Err(Error::MomentBudget(format!("E|eps|^{k} is not finite for {innovation:?}")));
    }
    Ok(())
}

/// Mean of `h(eps)` over `draws` innovations, with its standard error.
fn mc_mean(innovation: &DistSpec, draws: usize, key: &StreamKey, h: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let sampler = innovation.sampler()?;
    let mut stream = derive_stream(key);
    let mut eps = vec![0.0; draws];
    sampler.fill(&mut stream, &mut eps);
    let vals: Vec<f64> = eps.into_iter().map(h).collect();
    let nf = draws as f64;
    let m = vals.iter().sum::<f64>() / nf;
    let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok((m, (var / nf).sqrt()))
}

/// `sum_i ||b_i + a_i eps^2||_q`: closed form for integer `q` with normal
/// innovations, exact for discrete innovations, Monte Carlo otherwise.
pub fn gamma_c(spec: &GarchSpec, innovation: &DistSpec, q: f64) -> Result<GammaC> {
    check_exponent(q)?;
    require_abs_moment(innovation, 2.0 * q)?;
    let closed = matches!(innovation, DistSpec::StandardNormal)
        && integer_exponent(q).is_some()
        && spec.c_coeffs.iter().all(|c| c.a >= 0.0 && c.b >= 0.0);
    if let Some(atoms) = innovation.atoms() {
        let terms: Vec<f64> = spec
            .c_coeffs
            .iter()
            .map(|c| atoms.iter().map(|&(x, w)| w * (c.b + c.a * x * x).abs().powf(q)).sum::<f64>().powf(1.0 / q))
            .collect();
        return Ok(finish_gamma(terms, 0.0, q, Method::Exact));
    }
    if closed {
        let qi = integer_exponent(q).unwrap();
        let terms: Vec<f64> = spec
            .c_coeffs
            .iter()
            .map(|c| {
                (0..=qi)
                    .map(|k| binomial(qi, k) * c.b.powi((qi - k) as i32) * c.a.powi(k as i32) * innovation.moment(2 * k))
                    .sum::<f64>()
                    .powf(1.0 / q)
            })
            .collect();
        return Ok(finish_gamma(terms, 0.0, q, Method::Analytic));
    }
    gamma_c_mc(spec, innovation, q, DEFAULT_MC_DRAWS, &StreamKey::with_path(0, &[0x6761]))
}

/// Monte Carlo evaluation of [`gamma_c`]; term `i` uses `key.child(i)`.
pub fn gamma_c_mc(spec: &GarchSpec, innovation: &DistSpec, q: f64, draws: usize, key: &StreamKey) -> Result<GammaC> {
    check_exponent(q)?;
    require_abs_moment(innovation, 2.0 * q)?;
    if draws < 2 {
        return Err(Error::SampleSize { needed: 2, got: draws });
    }
    let mut terms = Vec::with_capacity(spec.c_coeffs.len());
    let mut var = 0.0;
    for (i, c) in spec.c_coeffs.iter().enumerate() {
        let (m, se_m) = mc_mean(innovation, draws, &key.child(i as u32), |e| (c.b + c.a * e * e).abs().powf(q))?;
        let norm = m.powf(1.0 / q);
        if m > 0.0 {
            var += (m.powf(1.0 / q - 1.0) / q * se_m).powi(2);
        }
        terms.push(norm);
    }
    Ok(finish_gamma(terms, var.sqrt(), q, Method::MonteCarlo))
}

fn finish_gamma(terms: Vec<f64>, se: f64, q: f64, method: Method) -> GammaC {
    let value: f64 = terms.iter().sum();
    GammaC { value, se, terms, q, method, stationary: value < 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contraction {
    /// `||L_eps||_q`.
    pub lq_norm: f64,
    pub se: f64,
    /// `sup_{|e| <= delta} L_e`.
    pub smallball_sup: f64,
    pub method: Method,
    pub verdict: Verdict,
}

/// `||L_eps||_q` and `sup_{|e| <= delta} L_e` for `L_e = |a| + |c| + |d| |e|`.
pub fn contraction_coefficient(
    spec: &IteratedSpec,
    innovation: &DistSpec,
    q: f64,
    delta: f64,
    draws: usize,
    key: &StreamKey,
) -> Result<Contraction> {
    check_exponent(q)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("delta must be finite and >= 0, got {delta}")));
    }
    let base = spec.a.abs() + spec.c.abs();
    let slope = spec.d.abs();
    let smallball_sup = base + slope * delta;
    let (lq_norm, se, method) = if slope == 0.0 {
        (base, 0.0, Method::Analytic)
    } else {
        require_abs_moment(innovation, q)?;
        if let Some(atoms) = innovation.atoms() {
            let m: f64 = atoms.iter().map(|&(x, w)| w * spec.lipschitz(x).powf(q)).sum();
            (m.powf(1.0 / q), 0.0, Method::Exact)
        } else if let Some(qi) = integer_exponent(q) {
            let m: f64 = (0..=qi)
                .map(|k| binomial(qi, k) * base.powi((qi - k) as i32) * slope.powi(k as i32) * innovation.abs_moment(k))
                .sum();
            (m.powf(1.0 / q), 0.0, Method::Analytic)
        } else {
            if draws < 2 {
                return Err(Error::SampleSize { needed: 2, got: draws });
            }
            let (m, se_m) = mc_mean(innovation, draws, key, |e| spec.lipschitz(e).powf(q))?;
            (m.powf(1.0 / q), m.powf(1.0 / q - 1.0) / q * se_m, Method::MonteCarlo)
        }
    };
    let verdict = Verdict::from_bool(lq_norm < 1.0 && smallball_sup < 1.0);
    Ok(Contraction { lq_norm, se, smallball_sup, method, verdict })
}

/// Per-lag bound `||X - X*||_p <= L ||Y - Y*||^hBeta (1 + 2 ||Y||^hAlpha)`,
/// norms taken in `L^{p (hAlpha + hBeta)}`.
pub fn holder_dependence_bound(holder: &HolderSpec, p: f64, y_norm: f64, y_diff_norms: &[f64]) -> Result<Vec<f64>> {
    let HolderSpec { l, h_alpha, h_beta } = *holder;
    if !(p * (h_alpha + h_beta) >= 1.0) {
        return Err(Error::domain(format!("need p (hAlpha + hBeta) >= 1, got {}", p * (h_alpha + h_beta))));
    }
    if !y_norm.is_finite() || y_diff_norms.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::domain("norms must be finite and non-negative"));
    }
    let factor = l * (1.0 + 2.0 * y_norm.powf(h_alpha));
    Ok(y_diff_norms.iter().map(|d| d.powf(h_beta) * factor).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlatticePoint {
    pub xi: f64,
    /// Estimate of `E |E_eps exp(i xi f(eps V))|`.
    pub estimate: f64,
    pub se: f64,
    /// `None` at `xi = 0`, which is excluded from the verdict.
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlatticeReport {
    pub points: Vec<NonlatticePoint>,
    pub verdict: Verdict,
    pub inner_method: Method,
    pub seed_path: String,
}

/// Averages the conditional CF modulus over `n_outer` stationary volatility
/// draws. The inner expectation is closed form for normal innovations with
/// the identity transform, exact for discrete innovations and an
/// `n_inner`-draw Monte Carlo mean otherwise. A grid point passes when the
/// estimate is below `1 - 4 SE`.
pub fn nonlattice_check(
    cfg: &ModelConfig,
    xi_grid: &[f64],
    n_outer: usize,
    n_inner: usize,
    key: &StreamKey,
    workers: usize,
) -> Result<NonlatticeReport> {
    if xi_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("frequency grid must be finite"));
    }
    if n_outer < 2 {
        return Err(Error::SampleSize { needed: 2, got: n_outer });
    }
    let budget = n_outer as u128 * n_inner.max(1) as u128;
    if budget > NONLATTICE_BUDGET as u128 {
        return Err(Error::Capacity { size: budget, budget: NONLATTICE_BUDGET as u128 });
    }
    let n = cfg.n;
    let atoms = cfg.innovation.atoms();
    let gaussian = matches!(cfg.innovation, DistSpec::StandardNormal) && cfg.transform.kind == TransformKind::Identity;
    let inner_method = if gaussian {
        Method::Analytic
    } else if atoms.is_some() {
        Method::Exact
    } else {
        if n_inner < 2 {
            return Err(Error::SampleSize { needed: 2, got: n_inner });
        }
        Method::MonteCarlo
    };
    let sampler = cfg.innovation.sampler()?;
    let sim = Simulator::new(&cfg.with_n(1))?;
    let outer = key.child(0);
    let inner = key.child(1);
    let moduli = try_par_map(workers, n_outer, |r| {
        let v = sim.path(&outer.child(r as u32))?.v[0];
        let f = |e: f64| apply_transform(&cfg.transform, e * v, n);
        let row: Vec<f64> = match inner_method {
            Method::Analytic => xi_grid.iter().map(|xi| (-0.5 * xi * xi * v * v).exp()).collect(),
            Method::Exact => {
                let atoms = atoms.as_ref().unwrap();
                xi_grid
                    .iter()
                    .map(|&xi| atoms.iter().map(|&(e, w)| w * Complex64::from_polar(1.0, xi * f(e))).sum::<Complex64>().norm())
                    .collect()
            }
            Method::MonteCarlo => {
                let mut eps = vec![0.0; n_inner];
                sampler.fill(&mut derive_stream(&inner.child(r as u32)), &mut eps);
                let fx: Vec<f64> = eps.iter().map(|&e| f(e)).collect();
                xi_grid
                    .iter()
                    .map(|&xi| {
                        let s: Complex64 = fx.iter().map(|&x| Complex64::from_polar(1.0, xi * x)).sum();
                        s.norm() / n_inner as f64
                    })
                    .collect()
            }
        };
        Ok(row)
    })?;
    let nf = n_outer as f64;
    let mut points = Vec::with_capacity(xi_grid.len());
    for (j, &xi) in xi_grid.iter().enumerate() {
        let m = moduli.iter().map(|row| row[j]).sum::<f64>() / nf;
        let var = moduli.iter().map(|row| (row[j] - m).powi(2)).sum::<f64>() / (nf - 1.0);
        let se = (var / nf).sqrt();
        let verdict = (xi != 0.0).then(|| Verdict::from_bool(m < 1.0 - 4.0 * se));
        points.push(NonlatticePoint { xi, estimate: m, se, verdict });
    }
    let verdict = Verdict::from_bool(points.iter().all(|p| p.verdict != Some(Verdict::Fail)));
    Ok(NonlatticeReport { points, verdict, inner_method, seed_path: key.to_string() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub n: usize,
    /// `sup_v |E exp(f(eps v) / sqrt n) - 1|` over the volatility grid.
    pub residual: f64,
    pub argmax_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub order: u8,
    pub rows: Vec<ResidualRow>,
    /// Fit of `log2 residual` against `log2 n`.
    pub fit: Option<LinearFit>,
}

/// `|E exp(f(eps v) / sqrt n) - 1|` for a compensator transform `f`.
pub fn compensator_residual(innovation: &DistSpec, order: u8, n: usize, v: f64) -> Result<f64> {
    let kind = TransformKind::Compensator { order };
    let scale = 1.0 / (n as f64).sqrt();
    let g = |e: f64| (crate::models::apply_transform(&crate::models::TransformSpec::new(kind.clone()), e * v, n) * scale).exp_m1();
    if let Some(atoms) = innovation.atoms() {
        return Ok(atoms.iter().map(|&(e, w)| w * g(e)).sum::<f64>().abs());
    }
    let (lo, hi) = innovation.support();
    // the cubic term makes exp(f) grow without bound on one side of the support
    if order == 3 && v != 0.0 && ((v > 0.0 && lo == f64::NEG_INFINITY) || (v < 0.0 && hi == f64::INFINITY)) {
        return Err(Error::MomentBudget(format!(
            "E exp(f(eps v)/sqrt n) is infinite for the order-3 compensator with {innovation:?}"
        )));
    }
    let sd = innovation.variance().sqrt();
    let mean = innovation.mean();
    let lo = lo.max(mean - 40.0 * sd);
    let hi = hi.min(mean + 40.0 * sd);
    let breaks: Vec<f64> = (-8..=8).map(|k| mean + f64::from(k) * sd).filter(|x| *x > lo && *x < hi).collect();
    let cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 4000 };
    let r = integrate(|e| g(e) * innovation.density(e).unwrap_or(0.0), lo, hi, &breaks, &cfg)?;
    Ok(r.value.abs())
}

/// Residual of the compensated price process across horizons.
pub fn martingale_residual(cfg: &ModelConfig, n_list: &[usize], v_grid: &[f64]) -> Result<MartingaleReport> {
    let order = match cfg.transform.kind {
        TransformKind::Compensator { order } => order,
        _ => return Err(Error::domain("martingale residual needs a compensator transform")),
    };
    if n_list.is_empty() || v_grid.is_empty() {
        return Err(Error::domain("n_list and v_grid must be non-empty"));
    }
    let rows_raw = par_map(0, n_list.len(), |j| -> Result<ResidualRow> {
        let n = n_list[j];
        let mut best = ResidualRow { n, residual: 0.0, argmax_v: v_grid[0] };
        for &v in v_grid {
            let r = compensator_residual(&cfg.innovation, order, n, v)?;
            if r > best.residual {
                best = ResidualRow { n, residual: r, argmax_v: v };
            }
        }
        Ok(best)
    });
    let rows = rows_raw.into_iter().collect::<Result<Vec<_>>>()?;
    let usable: Vec<&ResidualRow> = rows.iter().filter(|r| r.residual > 0.0).collect();
    let fit = if usable.len() >= 2 {
        let x: Vec<f64> = usable.iter().map(|r| (r.n as f64).log2()).collect();
        let y: Vec<f64> = usable.iter().map(|r| r.residual.log2()).collect();
        linear_fit(&x, &y).ok()
    } else {
        None
    };
    Ok(MartingaleReport { order, rows, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallCheck {
    /// `(delta, P(|eps| <= delta))`.
    pub masses: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

/// Checks `P(|eps| <= delta) > 0` on a decreasing sequence of `delta`.
pub fn smallball_check(innovation: &DistSpec) -> SmallBallCheck {
    let masses: Vec<(f64, f64)> = [1e-2, 1e-4, 1e-6, 1e-9]
        .iter()
        .map(|&d| {
            let m = match innovation.atoms() {
                Some(atoms) => atoms.iter().filter(|(x, _)| x.abs() <= d).map(|(_, w)| w).sum::<f64>() + 0.0,
                None => innovation.cdf(d) - innovation.cdf(-d),
            };
            (d, m)
        })
        .collect();
    let verdict = Verdict::from_bool(masses.iter().all(|&(_, m)| m > 0.0));
    SmallBallCheck { masses, verdict }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchCheck {
    pub q: f64,
    /// Lower bound `max((hAlpha v hBeta) / lambda, 3 (hAlpha + hBeta), 1)` that `q` must exceed.
    pub q_min: f64,
    pub q_ok: bool,
    pub lambda_ok: bool,
    pub gamma_c: GammaC,
    /// `sup_{|x| <= delta} c_i(x) <= ||c_i||_q` for small `delta`, per coefficient.
    pub local_bound_ok: Vec<bool>,
    pub smallball: SmallBallCheck,
    pub verdict: Verdict,
}

/// Moment, contraction and small-ball conditions for an augmented GARCH
/// model with a Hölder transform.
pub fn garch_assumption_check(spec: &GarchSpec, innovation: &DistSpec, holder: &HolderSpec, q: f64) -> Result<GarchCheck> {
    spec.validate()?;
    let q_min = (holder.h_alpha.max(holder.h_beta) / spec.lambda).max(3.0 * (holder.h_alpha + holder.h_beta));
    let q_ok = q > q_min && q >= 1.0;
    let lambda_ok = spec.lambda >= 0.5;
    let gc = gamma_c(spec, innovation, q.max(1.0))?;
    // c_i(x) = b + a x^2 tends to b as delta -> 0
    let local_bound_ok: Vec<bool> = spec
        .c_coeffs
        .iter()
        .zip(&gc.terms)
        .map(|(c, &norm)| c.b < norm || (c.a <= 0.0 && c.b <= norm * (1.0 + 1e-12)))
        .collect();
    let smallball = smallball_check(innovation);
    let ok = q_ok && lambda_ok && gc.stationary && local_bound_ok.iter().all(|&b| b) && smallball.verdict == Verdict::Pass;
    Ok(GarchCheck { q, q_min, q_ok, lambda_ok, gamma_c: gc, local_bound_ok, smallball, verdict: Verdict::from_bool(ok) })
}

/// Convenience accessor for the GARCH block of a configuration.
pub fn garch_spec(cfg: &ModelConfig) -> Option<&GarchSpec> {
    match &cfg.family {
        Family::Garch(s) => Some(s),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Kernel, LinearSpec, InnerMap, OuterMap, TransformSpec};

    fn garch(w: f64, u: f64, b: f64, a: f64, innov: DistSpec) -> ModelConfig {
        ModelConfig {
            family: Family::Garch(GarchSpec::garch11(w, u, b, a)),
            innovation: innov,
            transform: TransformSpec::identity(),
            n: 8,
        }
    }

    #[test]
    fn memoryless_profile_is_degenerate() {
        let cfg = garch(0.5, 0.0, 0.0, 0.0, DistSpec::StandardNormal);
        let prof = dependence_profile(&cfg, 2.0, &[1, 2, 5], 1000, &StreamKey::new(1), 0, Observable::X).unwrap();
        assert!(prof.degenerate && prof.fit.is_none());
        assert!(prof.lags.iter().all(|e| e.theta_hat == 0.0));
    }

    #[test]
    fn linear_geometric_profile_at_lag_one() {
        let cfg = ModelConfig {
            family: Family::Linear(LinearSpec {
                kernel: Kernel::Geometric { r: 0.5 },
                inner: InnerMap::Identity,
                outer: OuterMap::Identity,
                m_max: Some(60),
                burn_in: None,
            }),
            innovation: DistSpec::StandardNormal,
            transform: TransformSpec::identity(),
            n: 4,
        };
        let prof = dependence_profile(&cfg, 2.0, &[1, 3], 20_000, &StreamKey::new(2), 0, Observable::X).unwrap();
        let l1 = prof.lags[0];
        assert!((l1.theta_hat - (2.0f64 / 3.0).sqrt()).abs() < 3.0 * l1.se, "{l1:?}");
        // sqrt(2) sqrt(sum_{i>=3} 4^-i) = sqrt(2/48)
        let l3 = prof.lags[1];
        assert!((l3.theta_hat - (2.0f64 / 48.0).sqrt()).abs() < 3.0 * l3.se, "{l3:?}");
    }

    #[test]
    fn iid_profile_is_zero() {
        let cfg = ModelConfig::iid(DistSpec::CenteredExponential { rate: 1.0 }, TransformSpec::identity(), 6);
        let prof = dependence_profile(&cfg, 2.0, &[1, 2], 1000, &StreamKey::new(3), 0, Observable::X).unwrap();
        assert!(prof.lags.iter().all(|e| e.theta_hat <= 4.0 * e.se));
    }

    #[test]
    fn gamma_c_examples() {
        let zero = GarchSpec::garch11(1.0, 0.0, 0.0, 0.0);
        assert_eq!(gamma_c(&zero, &DistSpec::StandardNormal, 2.0).unwrap().value, 0.0);
        let g = gamma_c(&GarchSpec::garch11(0.1, 0.1, 0.8, 0.1), &DistSpec::StandardNormal, 2.0).unwrap();
        assert_eq!(g.method, Method::Analytic);
        assert!((g.value - 0.83f64.sqrt()).abs() < 1e-14 && g.stationary);
        let g = gamma_c(&GarchSpec::garch11(0.1, 0.1, 0.8, 0.5), &DistSpec::StandardNormal, 2.0).unwrap();
        assert!((g.value - 2.19f64.sqrt()).abs() < 1e-14 && !g.stationary);
    }

    #[test]
    fn gamma_c_mc_agrees_with_closed_form() {
        let spec = GarchSpec::garch11(0.1, 0.1, 0.8, 0.1);
        let mc = gamma_c_mc(&spec, &DistSpec::StandardNormal, 2.0, 200_000, &StreamKey::new(4)).unwrap();
        assert!((mc.value - 0.83f64.sqrt()).abs() < 3.0 * mc.se, "{mc:?}");
        // two-point +-1: c(eps) = 0.9 exactly
        let tp = DistSpec::TwoPoint { p: 0.5, x_lo: -1.0, x_hi: 1.0 };
        let g = gamma_c(&spec, &tp, 3.0).unwrap();
        assert_eq!(g.method, Method::Exact);
        assert!((g.value - 0.9).abs() < 1e-15);
    }

    #[test]
    fn contraction_examples() {
        let base = IteratedSpec { a: 0.5, b: 0.0, c: 0.0, d: 0.0, v_min: None, v_max: None, v0: 0.0, burn_in: None };
        let key = StreamKey::new(5);
        let r = contraction_coefficient(&base, &DistSpec::StandardNormal, 2.0, 0.1, 1000, &key).unwrap();
        assert_eq!((r.lq_norm, r.smallball_sup), (0.5, 0.5));
        let s = IteratedSpec { a: 0.3, c: 0.2, ..base.clone() };
        let r = contraction_coefficient(&s, &DistSpec::StandardNormal, 2.0, 0.1, 1000, &key).unwrap();
        assert!((r.lq_norm - 0.5).abs() < 1e-15 && (r.smallball_sup - 0.5).abs() < 1e-15);
        let s = IteratedSpec { d: 0.4, ..base };
        let u = DistSpec::Uniform { a: -1.0, b: 1.0 };
        let r = contraction_coefficient(&s, &u, 2.0, 0.0, 1000, &key).unwrap();
        assert!((r.lq_norm - (0.25f64 + 0.2 + 0.16 / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(r.verdict, Verdict::Pass);
        let mc = contraction_coefficient(&s, &u, 2.5, 0.0, 200_000, &key).unwrap();
        assert_eq!(mc.method, Method::MonteCarlo);
        // ||L||_2 <= ||L||_2.5 <= ||L||_inf = 0.9
        assert!(mc.lq_norm > r.lq_norm && mc.lq_norm < 0.9);
    }

    #[test]
    fn holder_bound_examples() {
        let lip = HolderSpec { l: 1.0, h_alpha: 0.0, h_beta: 1.0 };
        let b = holder_dependence_bound(&lip, 2.0, 5.0, &[0.0, 0.1, 0.3]).unwrap();
        assert_eq!(b[0], 0.0);
        assert!((b[1] - 0.3).abs() < 1e-15 && (b[2] - 0.9).abs() < 1e-15);
        let h = HolderSpec { l: 1.0, h_alpha: 1.0, h_beta: 1.0 };
        let b = holder_dependence_bound(&h, 1.0, 2.0, &[0.1]).unwrap();
        assert!((b[0] - 0.5).abs() < 1e-15);
        let tiny = HolderSpec { l: 1.0, h_alpha: 0.0, h_beta: 0.2 };
        assert!(holder_dependence_bound(&tiny, 2.0, 1.0, &[0.1]).is_err());
    }

    #[test]
    fn nonlattice_examples() {
        let cfg = ModelConfig::iid(DistSpec::StandardNormal, TransformSpec::identity(), 4);
        let r = nonlattice_check(&cfg, &[0.0, 1.0], 100, 0, &StreamKey::new(6), 0).unwrap();
        assert_eq!(r.points[0].estimate, 1.0);
        assert_eq!(r.points[0].verdict, None);
        assert!((r.points[1].estimate - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(r.verdict, Verdict::Pass);

        let lattice = ModelConfig::iid(DistSpec::TwoPoint { p: 0.5, x_lo: -1.0, x_hi: 1.0 }, TransformSpec::identity(), 4);
        let r = nonlattice_check(&lattice, &[1.0, std::f64::consts::PI], 100, 0, &StreamKey::new(7), 0).unwrap();
        assert!((r.points[1].estimate - 1.0).abs() < 1e-12);
        assert_eq!(r.points[1].verdict, Some(Verdict::Fail));
        assert_eq!(r.verdict, Verdict::Fail);

        // random volatility in [0.5, 2]: E exp(-V^2/2) < 1
        let garch = ModelConfig {
            family: Family::Garch(GarchSpec::garch11(0.25, 0.0, 0.0, 0.0)),
            ..cfg.clone()
        };
        let r = nonlattice_check(&garch, &[1.0], 200, 0, &StreamKey::new(8), 0).unwrap();
        assert!((r.points[0].estimate - (-0.125f64).exp()).abs() < 1e-13, "{:?}", r.points[0]);

        let skew = ModelConfig::iid(DistSpec::CenteredExponential { rate: 1.0 }, TransformSpec::identity(), 4);
        let r = nonlattice_check(&skew, &[1.0], 50, 20_000, &StreamKey::new(9), 0).unwrap();
        // |E e^{i(E-1)}| = 1/sqrt(2) for E ~ Exp(1)
        assert!((r.points[0].estimate - 0.5f64.sqrt()).abs() < 0.02, "{:?}", r.points[0]);
        assert!(nonlattice_check(&skew, &[1.0], 100_000, 10_000, &StreamKey::new(9), 0).is_err());
    }

    #[test]
    fn martingale_residual_rates() {
        let ns = [64, 128, 256, 512];
        let sym = ModelConfig::iid(DistSpec::TwoPoint { p: 0.5, x_lo: -1.0, x_hi: 1.0 }, TransformSpec::compensator(3), 64);
        let r = martingale_residual(&sym, &ns, &[0.5, 1.0, 1.5]).unwrap();
        let slope = r.fit.unwrap().slope;
        assert!((slope + 2.0).abs() < 0.3, "{slope}");
        let skew = ModelConfig::iid(DistSpec::CenteredExponential { rate: 1.0 }, TransformSpec::compensator(3), 64);
        let r = martingale_residual(&skew, &ns, &[0.5, 1.0, 1.5]).unwrap();
        let slope = r.fit.unwrap().slope;
        assert!((slope + 1.5).abs() < 0.3, "{slope}");
        let normal = ModelConfig::iid(DistSpec::StandardNormal, TransformSpec::compensator(3), 64);
        assert!(matches!(martingale_residual(&normal, &ns, &[1.0]), Err(Error::MomentBudget(_))));
        let normal2 = ModelConfig::iid(DistSpec::StandardNormal, TransformSpec::compensator(2), 64);
        assert!(martingale_residual(&normal2, &ns, &[1.0]).is_ok());
    }

    #[test]
    fn residual_leading_term() {
        // skewed: residual ~ v^3 E eps^3 n^-1.5 with E eps^3 = 2
        let r = compensator_residual(&DistSpec::CenteredExponential { rate: 1.0 }, 3, 4096, 1.0).unwrap();
        assert!((r / (2.0 * 4096f64.powf(-1.5)) - 1.0).abs() < 0.2, "{r}");
    }

    #[test]
    fn smallball_examples() {
        assert_eq!(smallball_check(&DistSpec::StandardNormal).verdict, Verdict::Pass);
        assert_eq!(smallball_check(&DistSpec::CenteredExponential { rate: 2.0 }).verdict, Verdict::Pass);
        assert_eq!(smallball_check(&DistSpec::TwoPoint { p: 0.5, x_lo: -1.0, x_hi: 1.0 }).verdict, Verdict::Fail);
        let with_zero = DistSpec::ThreePoint { p1: 0.25, p2: 0.5, x1: -1.0, x2: 0.0, x3: 1.0 };
        assert_eq!(smallball_check(&with_zero).verdict, Verdict::Pass);
    }

    #[test]
    fn garch_check() {
        let lip = HolderSpec { l: 1.0, h_alpha: 0.0, h_beta: 1.0 };
        let c = garch_assumption_check(&GarchSpec::garch11(0.1, 0.1, 0.8, 0.1), &DistSpec::StandardNormal, &lip, 4.0).unwrap();
        assert!(c.q_ok && c.local_bound_ok[0]);
        // gamma_c at q = 4 is (E (0.8 + 0.1 eps^2)^4)^(1/4)
        assert_eq!(c.verdict, Verdict::from_bool(c.gamma_c.value < 1.0));
        let low_q = garch_assumption_check(&GarchSpec::garch11(0.1, 0.1, 0.8, 0.1), &DistSpec::StandardNormal, &lip, 2.0).unwrap();
        assert!(!low_q.q_ok && low_q.verdict == Verdict::Fail);
    }
}
