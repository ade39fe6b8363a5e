use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

pub const CSV_HEADER: [&str; 9] = ["task", "n", "N", "target", "metric", "value", "se", "verdict", "seed_path"];
pub const PRICING_HEADER: [&str; 6] = ["K", "n", "mode", "price", "se", "oracle_gap"];
pub const CONVERGENCE_HEADER: [&str; 6] = ["target", "metric", "slope", "ci_lo", "ci_hi", "below_gaussian_all_n"];

/// One line of the main CSV table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub task: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub replicates: usize,
    pub target: String,
    pub metric: String,
    pub value: f64,
    pub se: Option<f64>,
    /// `pass`, `fail`, `flag`, `error` or `-`.
    pub verdict: String,
    pub seed_path: String,
}

impl Row {
    fn record(&self) -> [String; 9] {
        [
            self.task.clone(),
            self.n.to_string(),
            self.replicates.to_string(),
            self.target.clone(),
            self.metric.clone(),
            fmt_f64(self.value),
            self.se.map(fmt_f64).unwrap_or_default(),
            self.verdict.clone(),
            self.seed_path.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    #[serde(rename = "K")]
    pub strike: f64,
    pub n: usize,
    pub mode: String,
    pub price: f64,
    pub se: Option<f64>,
    pub oracle_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub target: String,
    pub metric: String,
    pub slope: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Whether the target's error is below the Gaussian error at every `n`
    /// (`None` for the Gaussian target itself).
    pub below_gaussian_all_n: Option<bool>,
}

/// Structured output of one task at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: String,
    pub n: usize,
    pub seed_path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub library: String,
    pub library_version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub results: Vec<TaskResult>,
    pub rows: Vec<Row>,
    pub pricing: Vec<PriceRow>,
    pub convergence: Vec<SlopeRow>,
    pub assumption_failures: usize,
    pub errors: usize,
    pub exit_code: i32,
}

/// Shortest round-trip decimal form, locale independent.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn write_table<W: Write, const K: usize>(out: W, header: [&str; K], records: impl Iterator<Item = [String; K]>) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> csv::Result<()> {
    write_table(out, CSV_HEADER, rows.iter().map(Row::record))
}

pub fn write_pricing<W: Write>(out: W, rows: &[PriceRow]) -> csv::Result<()> {
    write_table(
        out,
        PRICING_HEADER,
        rows.iter().map(|r| {
            [
                fmt_f64(r.strike),
                r.n.to_string(),
                r.mode.clone(),
                fmt_f64(r.price),
                r.se.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.oracle_gap),
            ]
        }),
    )
}

pub fn write_convergence<W: Write>(out: W, rows: &[SlopeRow]) -> csv::Result<()> {
    write_table(
        out,
        CONVERGENCE_HEADER,
        rows.iter().map(|r| {
            [
                r.target.clone(),
                r.metric.clone(),
                fmt_f64(r.slope),
                fmt_f64(r.ci_lo),
                fmt_f64(r.ci_hi),
                r.below_gaussian_all_n.map(|b| if b { "pass" } else { "fail" }).unwrap_or("-").to_string(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let row = Row {
            task: "cumulants".into(),
            n: 4,
            replicates: 100,
            target: "sample".into(),
            metric: "s2".into(),
            value: 2.5,
            se: None,
            verdict: "-".into(),
            seed_path: "7:1/4".into(),
        };
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "task,n,N,target,metric,value,se,verdict,seed_path\ncumulants,4,100,sample,s2,2.5,,-,7:1/4\n"
        );
    }

    #[test]
    fn float_format_is_plain() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(-3.0), "-3");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }
}
