use std::fs;
use std::path::{Path, PathBuf};

use edgeworth_core::diagnostics::{
    contraction_coefficient, dependence_profile, gamma_c, garch_assumption_check, martingale_residual,
    nonlattice_check, smallball_check, Verdict,
};
use edgeworth_core::edgeworth::{EdgeworthApprox, Mode};
use edgeworth_core::metrics::{
    batch_mean_se, berry_esseen_characteristic_sample, cf_sup_scan, default_b_grid, kolmogorov_distance, sorted,
    wasserstein1_cdf,
};
use edgeworth_core::models::{estimate_centering, normalized_sums, Family, ModelConfig, Simulator, TransformKind};
use edgeworth_core::moments::{estimate_cumulants, CumulantEstimate};
use edgeworth_core::numerics::norm_cdf;
use edgeworth_core::pricing::{price_put_edgeworth, price_put_gaussian_oracle, put_on_sample};
use edgeworth_core::rngkit::StreamKey;
use edgeworth_core::surrogate::SurrogateLaw;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Task};
use crate::convergence::{convergence_study, HorizonSample};
use crate::report::{write_convergence, write_pricing, write_rows, PriceRow, Report, Row, TaskResult};

/// Stream tags below the master seed; the horizon `n` is the next path component.
pub mod tags {
    pub const SUMS: u32 = 1;
    pub const CENTERING: u32 = 2;
    pub const DEPENDENCE: u32 = 3;
    pub const NONLATTICE: u32 = 4;
    pub const CONTRACTION: u32 = 5;
    pub const BOOTSTRAP: u32 = 6;
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ASSUMPTION: i32 = 2;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("cannot encode the report: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the configured worker count.
    pub workers: Option<usize>,
    /// Overrides the configured output directory.
    pub out_dir: Option<PathBuf>,
    /// Assumption failures do not change the exit code.
    pub warn_only: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: Report,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// Loads, runs and writes the reports of the experiment at `path`.
pub fn run(path: &Path, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let cfg = ExperimentConfig::load(path)?;
    run_config(&cfg, opts)
}

pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let report = execute(cfg, opts.workers.unwrap_or(cfg.workers), opts.warn_only || cfg.warn_only);
    let dir = opts.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    fs::create_dir_all(&dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
    let csv_path = dir.join(&cfg.output.csv);
    let json_path = dir.join(&cfg.output.json);
    write_csv(&csv_path, |f| write_rows(f, &report.rows))?;
    if !report.pricing.is_empty() {
        write_csv(&dir.join("pricing.csv"), |f| write_pricing(f, &report.pricing))?;
    }
    if !report.convergence.is_empty() {
        write_csv(&dir.join("convergence.csv"), |f| write_convergence(f, &report.convergence))?;
    }
    let text = serde_json::to_string_pretty(&report)?;
    fs::write(&json_path, text + "\n").map_err(|source| RunError::Io { path: json_path.clone(), source })?;
    Ok(RunOutcome { exit_code: report.exit_code, report, csv_path, json_path })
}

fn write_csv(path: &Path, body: impl FnOnce(&mut fs::File) -> csv::Result<()>) -> Result<(), RunError> {
    let mut f = fs::File::create(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })?;
    body(&mut f).map_err(|source| RunError::Csv { path: path.to_path_buf(), source })
}

/// Centering used for a horizon: analytic, configured or estimated.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Centering {
    pub mu: f64,
    pub se: f64,
    pub method: &'static str,
}

struct Horizon {
    n: usize,
    centering: Centering,
    sums: Vec<f64>,
    sorted: Vec<f64>,
    cumulants: CumulantEstimate,
    sums_key: StreamKey,
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    root: StreamKey,
    workers: usize,
    rows: Vec<Row>,
    results: Vec<TaskResult>,
    pricing: Vec<PriceRow>,
    errors: usize,
    assumption_failures: usize,
    prev_cf: Option<(f64, f64)>,
}

fn verdict_str(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Classical => "edgeworth-classical",
        Mode::Literal => "edgeworth-literal",
    }
}

/// Splits replicate-ordered draws into `batches` contiguous sorted blocks.
pub(crate) fn sorted_batches(sums: &[f64], batches: usize) -> Vec<Vec<f64>> {
    let len = sums.len() / batches;
    (0..batches).map(|b| sorted(&sums[b * len..(b + 1) * len]).expect("finite draws")).collect()
}

/// Integration range covering the sample and `[-12 s, 12 s]`.
pub(crate) fn w1_range(sorted: &[f64], s: f64, extra: (f64, f64)) -> (f64, f64) {
    let lo = sorted[0].min(-12.0 * s).min(extra.0) - s;
    let hi = sorted[sorted.len() - 1].max(12.0 * s).max(extra.1) + s;
    (lo, hi)
}

impl<'a> Runner<'a> {
    fn key(&self, tag: u32, n: usize) -> StreamKey {
        self.root.child(tag).child(n as u32)
    }

    #[allow(clippy::too_many_arguments)]
    fn row(&mut self, task: Task, n: usize, replicates: usize, target: &str, metric: &str, value: f64, se: Option<f64>, verdict: &str, key: &StreamKey) {
        self.rows.push(Row {
            task: task.name().into(),
            n,
            replicates,
            target: target.into(),
            metric: metric.into(),
            value,
            se,
            verdict: verdict.into(),
            seed_path: key.to_string(),
        });
    }

    fn error(&mut self, task: Task, n: usize, key: &StreamKey, message: String) {
        self.errors += 1;
        self.row(task, n, self.cfg.replicates, "-", "error", f64::NAN, None, "error", key);
        self.results.push(TaskResult { task: task.name().into(), n, seed_path: key.to_string(), result: None, error: Some(message) });
    }

    fn result(&mut self, task: Task, n: usize, key: &StreamKey, value: Value) {
        self.results.push(TaskResult { task: task.name().into(), n, seed_path: key.to_string(), result: Some(value), error: None });
    }

    fn assumption(&mut self, v: Verdict) -> &'static str {
        if v == Verdict::Fail {
            self.assumption_failures += 1;
        }
        v.name()
    }

    fn centering(&self, n: usize) -> edgeworth_core::Result<(ModelConfig, Centering)> {
        let mut model = self.cfg.model.at(n);
        let c = if let Some(mu) = model.transform.centering {
            Centering { mu, se: 0.0, method: "configured" }
        } else if model.transform.is_identity() && model.innovation.mean() == 0.0 {
            Centering { mu: 0.0, se: 0.0, method: "analytic" }
        } else {
            let est = estimate_centering(&model, self.cfg.centering.replicates, &self.key(tags::CENTERING, n), self.workers)?;
            Centering { mu: est.mean, se: est.se, method: "monte-carlo" }
        };
        model.transform.centering = Some(c.mu);
        Ok((model, c))
    }

    fn horizon(&self, n: usize) -> edgeworth_core::Result<Horizon> {
        let (cfg, centering) = self.centering(n)?;
        let sim = Simulator::new(&cfg)?;
        let sums_key = self.key(tags::SUMS, n);
        let sums = normalized_sums(&sim, self.cfg.replicates, &sums_key, self.workers)?;
        let sorted = sorted(&sums)?;
        let cumulants = estimate_cumulants(&sums, n)?;
        Ok(Horizon { n, centering, sums, sorted, cumulants, sums_key })
    }

    fn cumulants(&mut self, h: &Horizon) {
        let c = h.cumulants;
        let nr = c.replicates;
        self.row(Task::Cumulants, h.n, nr, "sample", "s2", c.s2, Some(c.se_s2), "-", &h.sums_key);
        self.row(Task::Cumulants, h.n, nr, "sample", "k3", c.k3, Some(c.se_k3), "-", &h.sums_key);
        self.result(Task::Cumulants, h.n, &h.sums_key, json!({ "cumulants": c, "centering": h.centering }));
    }

    fn edgeworth(&mut self, h: &Horizon) -> edgeworth_core::Result<()> {
        let block = self.cfg.edgeworth.clone().unwrap_or_default();
        h.cumulants.check_positive()?;
        let s = h.cumulants.s();
        let approx = EdgeworthApprox::from_cumulants(h.cumulants.s2, h.cumulants.k3, block.mode)?;
        let gauss = |x: f64| norm_cdf(x / s);
        let edge = |x: f64| approx.cdf(x);
        let dg = kolmogorov_distance(&h.sorted, gauss, block.refine)?;
        let de = kolmogorov_distance(&h.sorted, edge, block.refine)?;
        let mut bg = Vec::new();
        let mut be = Vec::new();
        for b in sorted_batches(&h.sums, block.batches) {
            bg.push(kolmogorov_distance(&b, gauss, block.refine)?);
            be.push(kolmogorov_distance(&b, edge, block.refine)?);
        }
        let (se_g, se_e) = (batch_mean_se(&bg).1, batch_mean_se(&be).1);
        let nr = self.cfg.replicates;
        self.row(Task::Edgeworth, h.n, nr, "gaussian", "kolmogorov", dg, Some(se_g), "-", &h.sums_key);
        self.row(Task::Edgeworth, h.n, nr, mode_name(block.mode), "kolmogorov", de, Some(se_e), verdict_str(de < dg), &h.sums_key);
        self.result(
            Task::Edgeworth,
            h.n,
            &h.sums_key,
            json!({
                "mode": block.mode, "s": s, "k3": h.cumulants.k3, "coefficient": approx.coefficient(),
                "monotone": approx.is_monotone(), "kolmogorov_gaussian": dg, "kolmogorov_edgeworth": de,
                "se_gaussian": se_g, "se_edgeworth": se_e, "batches": block.batches,
            }),
        );
        Ok(())
    }

    fn wasserstein(&mut self, h: &Horizon) -> edgeworth_core::Result<()> {
        let block = self.cfg.wasserstein.clone().unwrap_or_default();
        h.cumulants.check_positive()?;
        let s = h.cumulants.s();
        let nr = self.cfg.replicates;
        let gauss = |x: f64| norm_cdf(x / s);
        let batches = sorted_batches(&h.sums, block.batches);
        let wg = wasserstein1_cdf(&h.sorted, gauss, w1_range(&h.sorted, s, (0.0, 0.0)))?;
        let bg = batches
            .iter()
            .map(|b| wasserstein1_cdf(b, gauss, w1_range(b, s, (0.0, 0.0))))
            .collect::<edgeworth_core::Result<Vec<_>>>()?;
        let se_g = batch_mean_se(&bg).1;
        self.row(Task::Wasserstein, h.n, nr, "gaussian", "wasserstein1", wg, Some(se_g), "-", &h.sums_key);
        let mut out = json!({ "s": s, "wasserstein1_gaussian": wg, "se_gaussian": se_g, "batches": block.batches });
        match SurrogateLaw::from_cumulants(h.cumulants.s2, h.cumulants.k3) {
            Ok(law) => {
                let prep = law.prepared()?;
                let surr = |x: f64| prep.cdf(x);
                let range = law.effective_range();
                let ws = wasserstein1_cdf(&h.sorted, surr, w1_range(&h.sorted, s, range))?;
                let bs = batches
                    .iter()
                    .map(|b| wasserstein1_cdf(b, surr, w1_range(b, s, range)))
                    .collect::<edgeworth_core::Result<Vec<_>>>()?;
                let se_s = batch_mean_se(&bs).1;
                self.row(Task::Wasserstein, h.n, nr, "surrogate", "wasserstein1", ws, Some(se_s), verdict_str(ws < wg), &h.sums_key);
                out["wasserstein1_surrogate"] = json!(ws);
                out["se_surrogate"] = json!(se_s);
                out["surrogate"] = json!(law);
                out["surrogate_table_error"] = json!(prep.check_error());
            }
            Err(e) => {
                self.errors += 1;
                self.row(Task::Wasserstein, h.n, nr, "surrogate", "wasserstein1", f64::NAN, None, "error", &h.sums_key);
                out["surrogate_error"] = json!(e.to_string());
            }
        }
        self.result(Task::Wasserstein, h.n, &h.sums_key, out);
        Ok(())
    }

    fn dependence(&mut self, h_cfg: &ModelConfig, n: usize) -> edgeworth_core::Result<()> {
        let block = self.cfg.dependence.clone().expect("validated");
        let lags = block.lags.clone().expect("validated");
        let reps = block.replicates.unwrap_or((self.cfg.replicates / 10).max(1000));
        let key = self.key(tags::DEPENDENCE, n);
        let prof = dependence_profile(h_cfg, block.p, &lags, reps, &key, self.workers, block.observable)?;
        let target = match block.observable {
            edgeworth_core::diagnostics::Observable::X => "x",
            edgeworth_core::diagnostics::Observable::Y => "y",
        };
        for e in &prof.lags {
            self.row(Task::Dependence, n, reps, target, &format!("lambda_l{}", e.lag), e.theta_hat, Some(e.se), "-", &key);
        }
        if prof.degenerate {
            self.row(Task::Dependence, n, reps, target, "degenerate", 1.0, None, "flag", &key);
        } else if let Some(fit) = prof.fit {
            let v = self.assumption(Verdict::from_bool(fit.slope < 0.0 && fit.r2 > 0.9));
            self.row(Task::Dependence, n, reps, target, "fit_slope", fit.slope, Some(fit.slope_se), v, &key);
            self.row(Task::Dependence, n, reps, target, "fit_r2", fit.r2, None, v, &key);
        } else {
            self.row(Task::Dependence, n, reps, target, "fit_slope", f64::NAN, None, "flag", &key);
        }
        self.result(Task::Dependence, n, &key, serde_json::to_value(&prof).unwrap_or(Value::Null));
        Ok(())
    }

    fn assumptions(&mut self, h_cfg: &ModelConfig, n: usize) -> edgeworth_core::Result<()> {
        let block = self.cfg.assumptions.clone().unwrap_or_default();
        let model = h_cfg;
        let holder = model.transform.holder_constants(n);
        let mut out = serde_json::Map::new();
        let none = StreamKey::new(self.cfg.seed);

        let sb = smallball_check(&model.innovation);
        let min_mass = sb.masses.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        let v = self.assumption(sb.verdict);
        self.row(Task::Assumptions, n, 0, "innovation", "v1_smallball_mass", min_mass, None, v, &none);
        out.insert("smallball".into(), json!(sb));

        let nl_key = self.key(tags::NONLATTICE, n);
        let nl = nonlattice_check(model, &block.xi_grid, block.n_outer, block.n_inner, &nl_key, self.workers)?;
        for p in &nl.points {
            let v = match p.verdict {
                Some(v) => self.assumption(v),
                None => "-",
            };
            self.row(Task::Assumptions, n, block.n_outer, "model", &format!("b2_cf_modulus_xi={}", p.xi), p.estimate, Some(p.se), v, &nl_key);
        }
        out.insert("nonlattice".into(), json!(nl));

        match &model.family {
            Family::Garch(spec) => {
                let q_min = (holder.h_alpha.max(holder.h_beta) / spec.lambda).max(3.0 * (holder.h_alpha + holder.h_beta));
                let q = block.q.unwrap_or(q_min.floor() + 1.0);
                let check = garch_assumption_check(spec, &model.innovation, &holder, q)?;
                let gc = &check.gamma_c;
                let v = self.assumption(Verdict::from_bool(gc.stationary));
                self.row(Task::Assumptions, n, 0, "garch", &format!("gamma_c_q={q}"), gc.value, Some(gc.se), v, &none);
                let v = self.assumption(Verdict::from_bool(check.q_ok));
                self.row(Task::Assumptions, n, 0, "garch", "q_minus_q_min", q - check.q_min, None, v, &none);
                let v = self.assumption(check.verdict);
                self.row(Task::Assumptions, n, 0, "garch", "assumption", if check.verdict == Verdict::Pass { 1.0 } else { 0.0 }, None, v, &none);
                out.insert("garch".into(), json!(check));
            }
            Family::Iterated(spec) => {
                let q = block.q.unwrap_or((3.0 * (holder.h_alpha + holder.h_beta)).floor() + 1.0);
                let key = self.key(tags::CONTRACTION, n);
                let c = contraction_coefficient(spec, &model.innovation, q, block.delta, block.mc_draws, &key)?;
                let v = self.assumption(Verdict::from_bool(c.lq_norm < 1.0));
                self.row(Task::Assumptions, n, 0, "iterated", &format!("lq_norm_q={q}"), c.lq_norm, Some(c.se), v, &key);
                let v = self.assumption(Verdict::from_bool(c.smallball_sup < 1.0));
                self.row(Task::Assumptions, n, 0, "iterated", &format!("smallball_sup_delta={}", block.delta), c.smallball_sup, None, v, &key);
                out.insert("contraction".into(), json!(c));
            }
            Family::Linear(spec) => {
                let outer = spec.outer.holder();
                let x = holder.h_beta * outer.delta;
                let chk = spec.kernel.weighted_power_sum(x, spec.m_max());
                let v = self.assumption(Verdict::from_bool(chk.summable && chk.weighted_sum.is_finite()));
                self.row(Task::Assumptions, n, 0, "linear", &format!("kernel_k2_power_sum_x={x}"), chk.weighted_sum, None, v, &none);
                out.insert("kernel".into(), json!(chk));
            }
            Family::Volterra(spec) => {
                let q = block.q.unwrap_or(4.0);
                let norm = model.innovation.abs_moment(q.ceil() as u32).powf(1.0 / q.ceil());
                let sum = spec.summability(norm, holder.h_beta);
                let v = self.assumption(Verdict::from_bool(sum.is_finite()));
                self.row(Task::Assumptions, n, 0, "volterra", "kernel_summability", sum, None, v, &none);
                out.insert("volterra_summability".into(), json!(sum));
            }
        }
        if let Family::Garch(spec) = &model.family {
            if block.q.is_none() {
                let gc2 = gamma_c(spec, &model.innovation, 2.0)?;
                out.insert("gamma_c_q2".into(), json!(gc2));
            }
        }
        self.result(Task::Assumptions, n, &nl_key, Value::Object(out));
        Ok(())
    }

    fn martingale(&mut self) -> edgeworth_core::Result<()> {
        let model = self.cfg.model.at(self.cfg.n_list[0]);
        if !matches!(model.transform.kind, TransformKind::Compensator { .. }) {
            return Ok(());
        }
        let block = self.cfg.assumptions.clone().unwrap_or_default();
        let none = StreamKey::new(self.cfg.seed);
        let rep = martingale_residual(&model, &self.cfg.n_list, &block.v_grid)?;
        for r in &rep.rows {
            self.row(Task::Assumptions, r.n, 0, "compensator", "martingale_residual", r.residual, None, "-", &none);
        }
        let last = *self.cfg.n_list.last().unwrap();
        if let Some(fit) = rep.fit {
            self.row(Task::Assumptions, last, 0, "compensator", "martingale_log2_slope", fit.slope, Some(fit.slope_se), "flag", &none);
        }
        self.result(Task::Assumptions, last, &none, json!({ "martingale": rep }));
        Ok(())
    }

    fn cf_scan(&mut self, h: &Horizon) -> edgeworth_core::Result<()> {
        let block = self.cfg.cf_scan.clone().expect("validated");
        let (a, b) = (block.a.expect("validated"), block.b.expect("validated"));
        let scan = cf_sup_scan(&h.sums, a, b, block.grid_size)?;
        let se = 1.0 / (self.cfg.replicates as f64).sqrt();
        let verdict = match self.prev_cf {
            Some((prev, prev_se)) => verdict_str(scan.sup_modulus <= prev + 3.0 * (se * se + prev_se * prev_se).sqrt()),
            None => "-",
        };
        self.prev_cf = Some((scan.sup_modulus, se));
        let nr = self.cfg.replicates;
        self.row(Task::CfScan, h.n, nr, "empirical", "sup_modulus", scan.sup_modulus, Some(se), verdict, &h.sums_key);
        self.row(Task::CfScan, h.n, nr, "empirical", "argmax_xi", scan.argmax_xi, None, "-", &h.sums_key);
        self.result(Task::CfScan, h.n, &h.sums_key, json!(scan));
        Ok(())
    }

    fn be_characteristic(&mut self, h: &Horizon) -> edgeworth_core::Result<()> {
        let block = self.cfg.be_characteristic.clone().expect("validated");
        let a = block.a.expect("validated");
        h.cumulants.check_positive()?;
        let s = h.cumulants.s();
        let b_grid = block.b_grid.clone().unwrap_or_else(|| default_b_grid(if a > 0.0 { a } else { 1.0 }));
        let m = block.x_points;
        let x_grid: Vec<f64> = (0..m).map(|k| -8.0 * s + 16.0 * s * k as f64 / (m - 1) as f64).collect();
        let used = block.max_samples.min(h.sums.len());
        let ch = berry_esseen_characteristic_sample(&h.sums[..used], a, &b_grid, &x_grid)?;
        self.row(Task::BeCharacteristic, h.n, used, "empirical", "characteristic", ch.value, None, "-", &h.sums_key);
        self.row(Task::BeCharacteristic, h.n, used, "empirical", "best_b", ch.best_b, None, "-", &h.sums_key);
        self.result(Task::BeCharacteristic, h.n, &h.sums_key, json!({ "a": a, "samples": used, "characteristic": ch }));
        Ok(())
    }

    fn price(&mut self, h: &Horizon) -> edgeworth_core::Result<()> {
        let block = self.cfg.price.clone().expect("validated");
        let strikes = block.strikes.as_ref().expect("validated").to_vec();
        h.cumulants.check_positive()?;
        let s = h.cumulants.s();
        let drift = block.drift.unwrap_or((h.n as f64).sqrt() * h.centering.mu);
        let nr = self.cfg.replicates;
        let mut out = Vec::new();
        for k in strikes {
            let mc = put_on_sample(k, drift, &h.sums);
            let edge = price_put_edgeworth(&h.cumulants, drift, k, block.mode)?;
            let gauss = price_put_gaussian_oracle(s, k, drift)?;
            let metric = format!("put_K={k}");
            self.row(Task::Price, h.n, nr, "mc", &metric, mc.price, Some(mc.se), "-", &h.sums_key);
            self.row(Task::Price, h.n, nr, mode_name(block.mode), &metric, edge, None, "-", &h.sums_key);
            self.row(Task::Price, h.n, nr, "gaussian", &metric, gauss, None, "-", &h.sums_key);
            for (mode, price, se) in [("mc", mc.price, Some(mc.se)), (mode_name(block.mode), edge, None), ("gaussian", gauss, None)] {
                self.pricing.push(PriceRow { strike: k, n: h.n, mode: mode.into(), price, se, oracle_gap: price - gauss });
            }
            out.push(json!({ "K": k, "mc": mc, "edgeworth": edge, "gaussian": gauss }));
        }
        self.result(Task::Price, h.n, &h.sums_key, json!({ "drift": drift, "mode": block.mode, "prices": out }));
        Ok(())
    }
}

const SAMPLE_TASKS: [Task; 7] =
    [Task::Cumulants, Task::Edgeworth, Task::Wasserstein, Task::CfScan, Task::BeCharacteristic, Task::Price, Task::Convergence];

/// Runs every requested task and assembles the report (no file output).
pub fn execute(cfg: &ExperimentConfig, workers: usize, warn_only: bool) -> Report {
    let mut r = Runner {
        cfg,
        root: StreamKey::new(cfg.seed),
        workers,
        rows: Vec::new(),
        results: Vec::new(),
        pricing: Vec::new(),
        errors: 0,
        assumption_failures: 0,
        prev_cf: None,
    };
    let needs_sums = SAMPLE_TASKS.iter().any(|&t| cfg.wants(t));
    let mut kept = Vec::new();
    for &n in &cfg.n_list {
        let model_n = match r.centering(n) {
            Ok((m, _)) => Some(m),
            Err(e) => {
                for &t in &cfg.tasks {
                    if t != Task::Convergence {
                        r.error(t, n, &r.key(tags::CENTERING, n), e.to_string());
                    }
                }
                None
            }
        };
        let Some(model_n) = model_n else { continue };
        let horizon = if needs_sums {
            match r.horizon(n) {
                Ok(h) => Some(h),
                Err(e) => {
                    let key = r.key(tags::SUMS, n);
                    for &t in SAMPLE_TASKS.iter().filter(|&&t| cfg.wants(t) && t != Task::Convergence) {
                        r.error(t, n, &key, e.to_string());
                    }
                    None
                }
            }
        } else {
            None
        };
        let mut ordered: Vec<Task> = cfg.tasks.clone();
        ordered.sort();
        ordered.dedup();
        for task in ordered {
            let outcome = match (task, &horizon) {
                (Task::Cumulants, Some(h)) => {
                    r.cumulants(h);
                    Ok(())
                }
                (Task::Edgeworth, Some(h)) => r.edgeworth(h),
                (Task::Wasserstein, Some(h)) => r.wasserstein(h),
                (Task::CfScan, Some(h)) => r.cf_scan(h),
                (Task::BeCharacteristic, Some(h)) => r.be_characteristic(h),
                (Task::Price, Some(h)) => r.price(h),
                (Task::Dependence, _) => r.dependence(&model_n, n),
                (Task::Assumptions, _) => r.assumptions(&model_n, n),
                _ => Ok(()),
            };
            if let Err(e) = outcome {
                let key = horizon.as_ref().map(|h| h.sums_key.clone()).unwrap_or_else(|| r.key(tags::SUMS, n));
                r.error(task, n, &key, e.to_string());
            }
        }
        if let Some(h) = horizon {
            if cfg.wants(Task::Convergence) {
                kept.push(HorizonSample { n: h.n, sums: h.sums, cumulants: h.cumulants, seed_path: h.sums_key.to_string() });
            }
        }
    }
    if cfg.wants(Task::Assumptions) {
        if let Err(e) = r.martingale() {
            let key = StreamKey::new(cfg.seed);
            r.error(Task::Assumptions, *cfg.n_list.last().unwrap(), &key, e.to_string());
        }
    }
    let mut slopes = Vec::new();
    if cfg.wants(Task::Convergence) && kept.len() == cfg.n_list.len() {
        let block = cfg.convergence.clone().unwrap_or_default();
        let key = r.root.child(tags::BOOTSTRAP);
        match convergence_study(&kept, &block, &key) {
            Ok(study) => {
                for row in study.rows {
                    r.rows.push(row);
                }
                r.result(Task::Convergence, *cfg.n_list.last().unwrap(), &key, json!({ "errors": study.errors }));
                slopes = study.slopes;
            }
            Err(e) => r.error(Task::Convergence, *cfg.n_list.last().unwrap(), &key, e.to_string()),
        }
    }
    let exit_code = if r.errors > 0 {
        EXIT_ERROR
    } else if r.assumption_failures > 0 && !warn_only {
        EXIT_ASSUMPTION
    } else {
        EXIT_OK
    };
    Report {
        schema_version: crate::config::SCHEMA_VERSION,
        library: "edgeworth-core".into(),
        library_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        config: cfg.clone(),
        results: r.results,
        rows: r.rows,
        pricing: r.pricing,
        convergence: slopes,
        assumption_failures: r.assumption_failures,
        errors: r.errors,
        exit_code,
    }
}
