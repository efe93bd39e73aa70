//! Sequence-comparison metrics between a candidate ordering and the ground
//! truth, plus precedence-constraint slack.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::repair::{PrecedenceConstraint, RawPenalty};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("sequences are not permutations of the same ids: {0}")]
    NotPermutation(String),
    #[error("sequence of length {n} is too short (need at least {k})")]
    TooShort { n: usize, k: usize },
    #[error("constraint refers to unknown step `{0}`")]
    UnknownStep(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    pub n: usize,
    pub bigram_overlap: f64,
    pub trigram_overlap: f64,
    pub breakpoints: usize,
    pub lcs: usize,
    pub kendall_tau: f64,
    pub mean_displacement: f64,
    pub max_displacement: usize,
    pub raw_slack: f64,
}

impl MetricsReport {
    /// LCS as "k/n".
    pub fn lcs_fraction(&self) -> String {
        format!("{}/{}", self.lcs, self.n)
    }
}

/// Draft and repaired rows against the same truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    pub draft: MetricsReport,
    pub repaired: MetricsReport,
}

impl Comparison {
    pub fn to_table(&self) -> String {
        format_table(&[("Draft", &self.draft), ("Repaired", &self.repaired)])
    }
}

fn check_permutation<S: AsRef<str>>(cand: &[S], truth: &[S]) -> Result<(), MetricsError> {
    if cand.len() != truth.len() {
        return Err(MetricsError::NotPermutation(format!(
            "lengths {} and {}",
            cand.len(),
            truth.len()
        )));
    }
    let t: HashSet<&str> = truth.iter().map(AsRef::as_ref).collect();
    if t.len() != truth.len() {
        return Err(MetricsError::NotPermutation("truth repeats an id".into()));
    }
    let mut c = HashSet::new();
    for id in cand {
        let id = id.as_ref();
        if !t.contains(id) {
            return Err(MetricsError::NotPermutation(format!("`{id}` not in truth")));
        }
        if !c.insert(id) {
            return Err(MetricsError::NotPermutation(format!("`{id}` repeated")));
        }
    }
    Ok(())
}

fn positions<S: AsRef<str>>(seq: &[S]) -> HashMap<&str, usize> {
    seq.iter().enumerate().map(|(i, s)| (s.as_ref(), i)).collect()
}

fn matched_windows<S: AsRef<str>>(cand: &[S], truth: &[S], k: usize) -> usize {
    let windows: HashSet<Vec<&str>> = cand
        .windows(k)
        .map(|w| w.iter().map(AsRef::as_ref).collect())
        .collect();
    truth
        .windows(k)
        .filter(|w| windows.contains(&w.iter().map(AsRef::as_ref).collect::<Vec<_>>()))
        .count()
}

/// Fraction of the truth's length-`k` windows that also occur, in order,
/// as consecutive windows of `cand`.
pub fn ngram_overlap<S: AsRef<str>>(cand: &[S], truth: &[S], k: usize) -> Result<f64, MetricsError> {
    check_permutation(cand, truth)?;
    let n = truth.len();
    if k == 0 || n < k {
        return Err(MetricsError::TooShort { n, k: k.max(1) });
    }
    Ok(matched_windows(cand, truth, k) as f64 / (n - k + 1) as f64)
}

/// Truth adjacencies not preserved in `cand`.
pub fn breakpoints<S: AsRef<str>>(cand: &[S], truth: &[S]) -> Result<usize, MetricsError> {
    check_permutation(cand, truth)?;
    if truth.len() < 2 {
        return Ok(0);
    }
    Ok(truth.len() - 1 - matched_windows(cand, truth, 2))
}

pub fn lcs_length<S: AsRef<str>>(cand: &[S], truth: &[S]) -> Result<usize, MetricsError> {
    check_permutation(cand, truth)?;
    let m = truth.len();
    let mut prev = vec![0usize; m + 1];
    let mut cur = vec![0usize; m + 1];
    for a in cand {
        for (j, b) in truth.iter().enumerate() {
            cur[j + 1] = if a.as_ref() == b.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// Kendall τ-a over the positions of each id in the two sequences.
pub fn kendall_tau<S: AsRef<str>>(cand: &[S], truth: &[S]) -> Result<f64, MetricsError> {
    check_permutation(cand, truth)?;
    let n = truth.len();
    if n < 2 {
        return Err(MetricsError::TooShort { n, k: 2 });
    }
    let pc = positions(cand);
    let ranks: Vec<usize> = truth.iter().map(|id| pc[id.as_ref()]).collect();
    let mut net: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            net += if ranks[i] < ranks[j] { 1 } else { -1 };
        }
    }
    Ok(net as f64 / (n * (n - 1) / 2) as f64)
}

/// Mean and maximum of |position in cand − position in truth|.
pub fn displacement<S: AsRef<str>>(cand: &[S], truth: &[S]) -> Result<(f64, usize), MetricsError> {
    check_permutation(cand, truth)?;
    if truth.is_empty() {
        return Ok((0.0, 0));
    }
    let pc = positions(cand);
    let d: Vec<usize> = truth
        .iter()
        .enumerate()
        .map(|(i, id)| i.abs_diff(pc[id.as_ref()]))
        .collect();
    let sum: usize = d.iter().sum();
    Ok((sum as f64 / d.len() as f64, d.into_iter().max().unwrap_or(0)))
}

/// Aggregate violation of the constraints in `cand`; zero iff all hold.
pub fn raw_slack<S: AsRef<str>>(
    cand: &[S],
    constraints: &[PrecedenceConstraint],
    penalty: RawPenalty,
) -> Result<f64, MetricsError> {
    let pc = positions(cand);
    let mut total = 0u64;
    for c in constraints {
        let p = *pc
            .get(c.predecessor.as_str())
            .ok_or_else(|| MetricsError::UnknownStep(c.predecessor.clone()))?;
        let s = *pc
            .get(c.successor.as_str())
            .ok_or_else(|| MetricsError::UnknownStep(c.successor.clone()))?;
        total += penalty.charge(p, s);
    }
    Ok(total as f64)
}

/// Every metric for one candidate.
pub fn report<S: AsRef<str>>(
    cand: &[S],
    truth: &[S],
    constraints: &[PrecedenceConstraint],
    penalty: RawPenalty,
) -> Result<MetricsReport, MetricsError> {
    let (mean, max) = displacement(cand, truth)?;
    Ok(MetricsReport {
        n: truth.len(),
        bigram_overlap: ngram_overlap(cand, truth, 2)?,
        trigram_overlap: ngram_overlap(cand, truth, 3)?,
        breakpoints: breakpoints(cand, truth)?,
        lcs: lcs_length(cand, truth)?,
        kendall_tau: kendall_tau(cand, truth)?,
        mean_displacement: mean,
        max_displacement: max,
        raw_slack: raw_slack(cand, constraints, penalty)?,
    })
}

pub fn evaluate<S: AsRef<str>>(
    draft: &[S],
    repaired: &[S],
    truth: &[S],
    constraints: &[PrecedenceConstraint],
    penalty: RawPenalty,
) -> Result<Comparison, MetricsError> {
    Ok(Comparison {
        draft: report(draft, truth, constraints, penalty)?,
        repaired: report(repaired, truth, constraints, penalty)?,
    })
}

/// Aligned text table, one row per labelled report.
pub fn format_table(rows: &[(&str, &MetricsReport)]) -> String {
    let header = [
        "Sequence",
        "Bigram",
        "Trigram",
        "Break-points",
        "LCS",
        "Kendall τ",
        "Mean Δ",
        "Max Δ",
        "Raw slack",
    ];
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for (label, r) in rows {
        cells.push(vec![
            label.to_string(),
            format!("{:.3}", r.bigram_overlap),
            format!("{:.3}", r.trigram_overlap),
            r.breakpoints.to_string(),
            r.lcs_fraction(),
            format!("{:.3}", r.kendall_tau),
            format!("{:.3}", r.mean_displacement),
            r.max_displacement.to_string(),
            format!("{:.1}", r.raw_slack),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| cells.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| {
                let pad = w - cell.chars().count();
                if c == 0 {
                    format!("{cell}{}", " ".repeat(pad))
                } else {
                    format!("{}{cell}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
