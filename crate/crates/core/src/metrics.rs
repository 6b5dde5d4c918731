//! Aggregate metrics and CSV output.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::mac::SYMBOL_RATE_PER_US;
use crate::sim::{Arm, RunResult, Scenario, ScenarioKind, TrialRecord};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub x: f64,
    pub metric: String,
    pub value: f64,
    /// Half-width of the 95% confidence interval.
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub scenario: Scenario,
    /// Sorted by x, then metric name.
    pub rows: Vec<MetricRow>,
}

impl MetricsRecord {
    pub fn get(&self, x: f64, metric: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.x == x && r.metric == metric)
    }

    /// Values of one metric in x order.
    pub fn series(&self, metric: &str) -> Vec<&MetricRow> {
        self.rows.iter().filter(|r| r.metric == metric).collect()
    }
}

/// Binomial proportion with its normal-approximation half-width.
pub fn proportion(hits: u64, n: u64) -> Option<(f64, f64)> {
    if n == 0 {
        return None;
    }
    let p = hits as f64 / n as f64;
    Some((p, Z95 * (p * (1.0 - p) / n as f64).sqrt()))
}

/// Ratio of sums `sum(num) / sum(den)` with the delta-method half-width.
pub fn ratio(pairs: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pairs.len();
    let den: f64 = pairs.iter().map(|p| p.1).sum();
    if n == 0 || den <= 0.0 {
        return None;
    }
    let theta = pairs.iter().map(|p| p.0).sum::<f64>() / den;
    if n == 1 {
        return Some((theta, 0.0));
    }
    let mean_den = den / n as f64;
    let ss: f64 = pairs.iter().map(|&(a, b)| (a - theta * b).powi(2)).sum();
    let var = ss / ((n * (n - 1)) as f64 * mean_den * mean_den);
    Some((theta, Z95 * var.sqrt()))
}

fn protocol_rows(x: f64, arm: Arm, trials: &[&TrialRecord], rows: &mut Vec<MetricRow>) {
    let prefix = match arm {
        Arm::CoopGeo => "",
        Arm::Baseline => "baseline_",
    };
    let mut push = |name: &str, v: Option<(f64, f64)>| {
        if let Some((value, ci95)) = v {
            rows.push(MetricRow { x, metric: format!("{prefix}{name}"), value, ci95 });
        }
    };
    let n = trials.len() as u64;
    let failed = trials.iter().filter(|t| !t.delivered).count() as u64;
    push("per", proportion(failed, n));
    let undecoded: usize = trials.iter().map(|t| t.undecoded_hops).sum();
    let hops: usize = trials.iter().map(|t| t.hops_with_forwarder).sum();
    push("tx_error_prob", proportion(undecoded as u64, hops as u64));
    let collided: usize = trials.iter().map(|t| t.collided_rounds).sum();
    let rounds: usize = trials.iter().map(|t| t.rounds).sum();
    push("collision_prob", proportion(collided as u64, rounds as u64));
    let pairs: Vec<(f64, f64)> =
        trials.iter().map(|t| (t.bits_delivered, SYMBOL_RATE_PER_US * t.bits_per_symbol * t.elapsed.0)).collect();
    push("norm_throughput", ratio(&pairs));
}

pub fn compute_metrics(r: &RunResult) -> MetricsRecord {
    let mut rows = Vec::new();
    if r.scenario.kind == ScenarioKind::RelayOrdering {
        for rec in &r.ser {
            if let Some((value, ci95)) = proportion(rec.errors, rec.symbols) {
                rows.push(MetricRow { x: rec.snr_db, metric: rec.arm.name(), value, ci95 });
            }
        }
    } else {
        let mut groups: BTreeMap<(u64, Arm), Vec<&TrialRecord>> = BTreeMap::new();
        for t in &r.trials {
            groups.entry((t.x.to_bits(), t.arm)).or_default().push(t);
        }
        for ((x, arm), trials) in groups {
            protocol_rows(f64::from_bits(x), arm, &trials, &mut rows);
        }
    }
    rows.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.metric.cmp(&b.metric)));
    MetricsRecord { scenario: r.scenario.clone(), rows }
}

/// Long-format CSV: a `#` block echoing the scenario, then
/// `x,metric,value,ci95` rows.
pub fn to_csv(m: &MetricsRecord) -> String {
    let mut out = String::new();
    out.push_str("# coopgeo results\n");
    for line in m.scenario.to_text().lines() {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "# x = {}", m.scenario.kind.axis());
    out.push_str("# norm_throughput = delivered bits / (22 Msymbol/s * log2 M * elapsed virtual time)\n");
    out.push_str("# ci95 = half-width of the 95% normal-approximation interval\n");
    out.push_str("x,metric,value,ci95\n");
    for row in &m.rows {
        let _ = writeln!(out, "{},{},{:.6e},{:.6e}", row.x, row.metric, row.value, row.ci95);
    }
    out
}
