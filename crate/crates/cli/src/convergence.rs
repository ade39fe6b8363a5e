//! Log-log error slopes across a geometric list of horizons.

use edgeworth_core::edgeworth::{EdgeworthApprox, Mode};
use edgeworth_core::metrics::{batch_mean_se, kolmogorov_distance, wasserstein1_cdf};
use edgeworth_core::moments::CumulantEstimate;
use edgeworth_core::numerics::{linear_fit, norm_cdf};
use edgeworth_core::rngkit::{derive_stream, StreamKey};
use edgeworth_core::surrogate::SurrogateLaw;
use edgeworth_core::{Error, Result};
use rand::Rng;
use serde::Serialize;

use crate::config::{ConvergenceTask, Task};
use crate::report::{Row, SlopeRow};
use crate::run::{sorted_batches, w1_range};

pub const TARGETS: [&str; 3] = ["gaussian", "edgeworth-classical", "surrogate"];
pub const METRICS: [&str; 2] = ["kolmogorov", "wasserstein1"];

/// Replicates of `S_n / sqrt(n)` at one horizon, in replicate order.
#[derive(Debug, Clone)]
pub struct HorizonSample {
    pub n: usize,
    pub sums: Vec<f64>,
    pub cumulants: CumulantEstimate,
    pub seed_path: String,
}

/// Per-batch errors of one (target, metric) pair at one horizon.
#[derive(Debug, Clone, Serialize)]
pub struct BatchErrors {
    pub n: usize,
    pub target: String,
    pub metric: String,
    pub batches: Vec<f64>,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone)]
pub struct Study {
    pub rows: Vec<Row>,
    pub slopes: Vec<SlopeRow>,
    pub errors: Vec<BatchErrors>,
}

fn horizon_errors(h: &HorizonSample, block: &ConvergenceTask) -> Result<Vec<BatchErrors>> {
    h.cumulants.check_positive()?;
    let s = h.cumulants.s();
    let edge = EdgeworthApprox::from_cumulants(h.cumulants.s2, h.cumulants.k3, Mode::Classical)?;
    let surr = SurrogateLaw::from_cumulants(h.cumulants.s2, h.cumulants.k3)?;
    let prep = surr.prepared()?;
    let range = surr.effective_range();
    let cdf = |target: usize, x: f64| match target {
        0 => norm_cdf(x / s),
        1 => edge.cdf(x),
        _ => prep.cdf(x),
    };
    let batches = sorted_batches(&h.sums, block.batches);
    let mut out = Vec::new();
    for (i, target) in TARGETS.iter().enumerate() {
        let f = |x: f64| cdf(i, x);
        let extra = if i == 2 { range } else { (0.0, 0.0) };
        let mut kol = Vec::with_capacity(batches.len());
        let mut w1 = Vec::with_capacity(batches.len());
        for b in &batches {
            kol.push(kolmogorov_distance(b, f, block.refine)?);
            w1.push(wasserstein1_cdf(b, f, w1_range(b, s, extra))?);
        }
        for (metric, vals) in METRICS.iter().zip([kol, w1]) {
            let (mean, se) = batch_mean_se(&vals);
            out.push(BatchErrors { n: h.n, target: target.to_string(), metric: metric.to_string(), batches: vals, mean, se });
        }
    }
    Ok(out)
}

fn fit_slope(ns: &[usize], errs: &[f64]) -> Result<f64> {
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    Ok(linear_fit(&x, &y)?.slope)
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let (i, t) = (pos.floor() as usize, pos - pos.floor());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - t) + sorted[i + 1] * t
    } else {
        sorted[i]
    }
}

/// Errors of every target and metric per horizon, the least-squares slope of
/// `ln error` on `ln n`, and a percentile bootstrap interval that resamples
/// batches within each horizon (draws come from `key` in a fixed order).
pub fn convergence_study(horizons: &[HorizonSample], block: &ConvergenceTask, key: &StreamKey) -> Result<Study> {
    if horizons.len() < 3 {
        return Err(Error::SampleSize { needed: 3, got: horizons.len() });
    }
    if block.batches < 2 {
        return Err(Error::SampleSize { needed: 2, got: block.batches });
    }
    let mut errors = Vec::new();
    for h in horizons {
        errors.extend(horizon_errors(h, block)?);
    }
    let ns: Vec<usize> = horizons.iter().map(|h| h.n).collect();
    let pick = |t: &str, m: &str| -> Vec<&BatchErrors> { errors.iter().filter(|e| e.target == t && e.metric == m).collect() };
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    let mut rng = derive_stream(key);
    for target in TARGETS {
        for metric in METRICS {
            let cells = pick(target, metric);
            let base = pick("gaussian", metric);
            let below: Vec<bool> = cells.iter().zip(&base).map(|(c, g)| c.mean < g.mean).collect();
            for ((c, h), &b) in cells.iter().zip(horizons).zip(&below) {
                let verdict = if target == "gaussian" { "-" } else if b { "pass" } else { "fail" };
                rows.push(Row {
                    task: Task::Convergence.name().into(),
                    n: c.n,
                    replicates: h.sums.len(),
                    target: target.into(),
                    metric: metric.into(),
                    value: c.mean,
                    se: Some(c.se),
                    verdict: verdict.into(),
                    seed_path: h.seed_path.clone(),
                });
            }
            let means: Vec<f64> = cells.iter().map(|c| c.mean).collect();
            let slope = fit_slope(&ns, &means)?;
            let mut boot = Vec::with_capacity(block.bootstrap);
            for _ in 0..block.bootstrap {
                let resampled: Vec<f64> = cells
                    .iter()
                    .map(|c| {
                        let k = c.batches.len();
                        (0..k).map(|_| c.batches[rng.random_range(0..k)]).sum::<f64>() / k as f64
                    })
                    .collect();
                boot.push(fit_slope(&ns, &resampled)?);
            }
            boot.sort_by(|a, b| a.total_cmp(b));
            let (ci_lo, ci_hi) = if boot.is_empty() { (f64::NAN, f64::NAN) } else { (percentile(&boot, 0.025), percentile(&boot, 0.975)) };
            let below_all = (target != "gaussian").then(|| below.iter().all(|&b| b));
            slopes.push(SlopeRow { target: target.into(), metric: metric.into(), slope, ci_lo, ci_hi, below_gaussian_all_n: below_all });
            rows.push(Row {
                task: Task::Convergence.name().into(),
                n: *ns.last().unwrap(),
                replicates: horizons[0].sums.len(),
                target: target.into(),
                metric: format!("{metric}_loglog_slope"),
                value: slope,
                se: None,
                verdict: match below_all {
                    Some(true) => "pass",
                    Some(false) => "fail",
                    None => "-",
                }
                .into(),
                seed_path: key.to_string(),
            });
        }
    }
    Ok(Study { rows, slopes, errors })
}
