//! File emission and flag-list parsing for the CLI.

use std::fs;
use std::path::Path;

use serde::Serialize;

use qkdrb_core::sim::SimReport;

use crate::config::ConfigError;

pub fn write_file(path: &Path, content: &str) -> Result<(), ConfigError> {
    fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

/// Node counts: comma list ("5,9,13") or inclusive range "5..25" stepping
/// by 2. Every value must be odd; offenders are listed in the error.
pub fn parse_node_list(text: &str) -> Result<Vec<usize>, ConfigError> {
    let values: Vec<usize> = if let Some((from, to)) = text.split_once("..") {
        let from: usize = parse_int(from)?;
        let to: usize = parse_int(to)?;
        if from > to {
            return Err(format!("empty node range {text:?}").into());
        }
        (from..=to).step_by(2).collect()
    } else {
        text.split(',').map(parse_int).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("no node counts given".into());
    }
    let even: Vec<usize> = values.iter().copied().filter(|n| n % 2 == 0 || *n < 3).collect();
    if !even.is_empty() {
        return Err(format!("node counts must be odd and >= 3; offending values: {even:?}").into());
    }
    Ok(values)
}

/// Link lengths: comma list ("1,2.5,5") or inclusive range with step
/// ("5..35:5").
pub fn parse_length_list(text: &str) -> Result<Vec<f64>, ConfigError> {
    let values: Vec<f64> = if let Some((range, step)) = text.split_once(':') {
        let (from, to) = range
            .split_once("..")
            .ok_or_else(|| format!("expected \"from..to:step\", got {text:?}"))?;
        let from: f64 = parse_float(from)?;
        let to: f64 = parse_float(to)?;
        let step: f64 = parse_float(step)?;
        if step.is_nan() || step <= 0.0 || from > to {
            return Err(format!("bad length range {text:?}").into());
        }
        let count = ((to - from) / step).floor() as usize;
        (0..=count).map(|i| from + i as f64 * step).collect()
    } else if text.contains("..") {
        return Err(format!("length ranges need an explicit step: \"from..to:step\", got {text:?}")
            .into());
    } else {
        text.split(',').map(parse_float).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("no link lengths given".into());
    }
    for &le in &values {
        if le.is_nan() || le <= 0.0 {
            return Err(format!("link lengths must be positive, got {le}").into());
        }
    }
    Ok(values)
}

fn parse_int(text: &str) -> Result<usize, ConfigError> {
    text.trim().parse().map_err(|_| format!("bad integer {:?}", text.trim()).into())
}

fn parse_float(text: &str) -> Result<f64, ConfigError> {
    text.trim().parse().map_err(|_| format!("bad number {:?}", text.trim()).into())
}

/// Per-pair CSV emitted next to the JSON report.
pub fn pairs_csv(report: &SimReport) -> String {
    let mut out = String::from("pair,delivered_bps,min_pool_bits,starved\n");
    for stats in &report.pairs {
        out.push_str(&format!(
            "{}-{},{},{},{}\n",
            stats.pair.0, stats.pair.1, stats.delivered_bps, stats.min_pool_bits, stats.starved
        ));
    }
    out
}

/// JSON report: run metadata plus the simulator output.
#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub architecture: String,
    pub node_count: usize,
    pub adjacent_link_km: f64,
    pub analytic_rate_bps: f64,
    pub demand_factor: f64,
    pub block_bits: usize,
    pub warmup_s: f64,
    pub measure_s: f64,
    pub consumption_rate_bps: f64,
    pub seed: u64,
    #[serde(flatten)]
    pub report: SimReport,
}
