use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::metrics::{self, MetricsReport};
use crate::repair::{repair, ClusterConstraint, CostBreakdown, PrecedenceConstraint, Procedure, RawPenalty, RepairWeights, SearchParams};

use super::PipelineError;

/// Candidate values per weight; the grid is their Cartesian product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightGrid {
    pub lambda_pos: Vec<f64>,
    pub lambda_edge: Vec<f64>,
    pub lambda_cluster: Vec<f64>,
    pub lambda_raw: Vec<f64>,
    pub raw_penalty: RawPenalty,
}

impl Default for WeightGrid {
    fn default() -> Self {
        Self {
            lambda_pos: vec![0.25, 0.5, 1.0],
            lambda_edge: vec![0.5, 1.0, 2.0],
            lambda_cluster: vec![0.0],
            lambda_raw: vec![0.5, 1.0, 2.0],
            raw_penalty: RawPenalty::default(),
        }
    }
}

impl WeightGrid {
    /// Grid points in nested order (pos outermost, raw innermost).
    pub fn points(&self) -> Vec<RepairWeights> {
        let mut out = Vec::new();
        for &p in &self.lambda_pos {
            for &e in &self.lambda_edge {
                for &c in &self.lambda_cluster {
                    for &r in &self.lambda_raw {
                        out.push(RepairWeights::new(p, e, c, r).with_penalty(self.raw_penalty));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneRow {
    /// 1-based; rows with equal keys share a rank.
    pub rank: usize,
    pub weights: RepairWeights,
    pub metrics: MetricsReport,
    pub cost: CostBreakdown,
    pub order: Vec<String>,
}

fn key_cmp(a: &MetricsReport, b: &MetricsReport) -> Ordering {
    a.raw_slack
        .total_cmp(&b.raw_slack)
        .then_with(|| b.kendall_tau.total_cmp(&a.kendall_tau))
        .then_with(|| a.breakpoints.cmp(&b.breakpoints))
}

/// Repair the draft under every grid point (same seed each time) and rank
/// by raw slack, then Kendall τ (higher first), then breakpoints. Ties keep
/// grid order.
#[allow(clippy::too_many_arguments)]
pub fn tune(
    truth: &Procedure,
    draft: &Procedure,
    constraints: &[PrecedenceConstraint],
    clusters: &[ClusterConstraint],
    grid: &WeightGrid,
    search: &SearchParams,
    seed: u64,
) -> Result<Vec<TuneRow>, PipelineError> {
    let points = grid.points();
    if points.is_empty() {
        return Err(PipelineError::Runtime("weight grid is empty".into()));
    }
    let truth_ids = truth.ids();
    let mut rows = Vec::with_capacity(points.len());
    for w in points {
        let result = repair(draft, constraints, clusters, &w, search, seed).map_err(|e| PipelineError::Runtime(e.to_string()))?;
        let m = metrics::report(&result.order, &truth_ids, constraints, w.raw_penalty)
            .map_err(|e| PipelineError::Runtime(e.to_string()))?;
        rows.push(TuneRow {
            rank: 0,
            weights: w,
            metrics: m,
            cost: result.cost,
            order: result.order,
        });
    }
    rows.sort_by(|a, b| key_cmp(&a.metrics, &b.metrics));
    for i in 0..rows.len() {
        rows[i].rank = if i > 0 && key_cmp(&rows[i - 1].metrics, &rows[i].metrics) == Ordering::Equal {
            rows[i - 1].rank
        } else {
            i + 1
        };
    }
    Ok(rows)
}

/// Aligned text rendering of a ranking.
pub fn format_ranking(rows: &[TuneRow]) -> String {
    let mut out = String::from("rank  λpos  λedge  λcluster  λraw  raw_slack  kendall_tau  breakpoints\n");
    for r in rows {
        out.push_str(&format!(
            "{:>4}  {:>4}  {:>5}  {:>8}  {:>4}  {:>9.1}  {:>11.3}  {:>11}\n",
            r.rank,
            r.weights.lambda_pos,
            r.weights.lambda_edge,
            r.weights.lambda_cluster,
            r.weights.lambda_raw,
            r.metrics.raw_slack,
            r.metrics.kendall_tau,
            r.metrics.breakpoints
        ));
    }
    out
}
