use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{CostBreakdown, Problem};
use super::{ClusterConstraint, PrecedenceConstraint, Procedure, RepairError, RepairWeights};

/// Cost differences below this are treated as ties.
const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    /// Restart 0 starts from the draft; the rest from seeded shuffles.
    pub restarts: usize,
    /// Consecutive non-improving perturbation kicks before a restart ends.
    pub max_stale_iters: usize,
    /// Run restarts on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_stale_iters: 20,
            parallel: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchTrace {
    pub iterations: u64,
    pub restarts: usize,
    pub best_restart: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepairResult {
    /// Step ids in repaired order.
    pub order: Vec<String>,
    /// `permutation[i]` is the new position of draft step `i`.
    pub permutation: Vec<usize>,
    pub cost: CostBreakdown,
    pub draft_cost: CostBreakdown,
    pub trace: SearchTrace,
}

impl RepairResult {
    pub(crate) fn from_order(
        draft: &Procedure,
        order: &[usize],
        cost: CostBreakdown,
        draft_cost: CostBreakdown,
        trace: SearchTrace,
    ) -> Self {
        let mut permutation = vec![0; order.len()];
        for (p, &i) in order.iter().enumerate() {
            permutation[i] = p;
        }
        Self {
            order: order.iter().map(|&i| draft.steps[i].id.clone()).collect(),
            permutation,
            cost,
            draft_cost,
            trace,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("repair result serializes")
    }
}

/// Total, then raw penalty (among equally cheap orders, prefer the one that
/// honours more constraints), then displacement from the draft, then
/// lexicographic order.
pub(crate) fn better(a: (&CostBreakdown, &[usize]), b: (&CostBreakdown, &[usize])) -> Ordering {
    if a.0.total < b.0.total - EPS {
        return Ordering::Less;
    }
    if b.0.total < a.0.total - EPS {
        return Ordering::Greater;
    }
    a.0.raw
        .cmp(&b.0.raw)
        .then_with(|| a.0.position.cmp(&b.0.position))
        .then_with(|| a.1.cmp(b.1))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    splitmix64(seed ^ splitmix64(restart as u64))
}

/// Move the element at `from` to index `to` (in the resulting vector).
fn reinsert(order: &[usize], from: usize, to: usize) -> Vec<usize> {
    let mut v = order.to_vec();
    let x = v.remove(from);
    v.insert(to, x);
    v
}

/// Steepest descent over single-step reinsertions (which include every
/// adjacent swap). Returns the local optimum and the number of moves made.
fn descend(problem: &Problem, mut order: Vec<usize>) -> (Vec<usize>, CostBreakdown, u64) {
    let n = problem.n;
    let mut cost = problem.evaluate(&order);
    let mut moves = 0;
    loop {
        let mut best: Option<(Vec<usize>, CostBreakdown)> = None;
        for from in 0..n {
            for to in 0..n {
                if to == from {
                    continue;
                }
                let cand = reinsert(&order, from, to);
                let c = problem.evaluate(&cand);
                let replace = match &best {
                    None => true,
                    Some((bo, bc)) => better((&c, &cand), (bc, bo)) == Ordering::Less,
                };
                if replace {
                    best = Some((cand, c));
                }
            }
        }
        match best {
            Some((o, c)) if c.total < cost.total - EPS => {
                order = o;
                cost = c;
                moves += 1;
            }
            _ => return (order, cost, moves),
        }
    }
}

fn run_restart(problem: &Problem, start: Vec<usize>, stale_limit: usize, seed: u64) -> (Vec<usize>, CostBreakdown, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut best, mut best_cost, mut iterations) = descend(problem, start);
    let n = problem.n;
    if n < 3 {
        return (best, best_cost, iterations);
    }
    let mut stale = 0;
    while stale < stale_limit {
        let mut kicked = best.clone();
        for _ in 0..2 {
            let from = rng.gen_range(0..n);
            let to = rng.gen_range(0..n);
            kicked = reinsert(&kicked, from, to);
        }
        let (o, c, m) = descend(problem, kicked);
        iterations += m;
        if better((&c, &o), (&best_cost, &best)) == Ordering::Less {
            if c.total < best_cost.total - EPS {
                stale = 0;
            } else {
                stale += 1;
            }
            best = o;
            best_cost = c;
        } else {
            stale += 1;
        }
    }
    (best, best_cost, iterations)
}

/// Reorder the draft to minimize the repair objective.
///
/// Every restart is a steepest descent followed by perturbation kicks until
/// `max_stale_iters` kicks in a row fail to improve. Restart 0 starts at the
/// draft, so the result never costs more than the draft itself. Each restart
/// has its own seed derived from `seed`; the best result is chosen with a
/// fixed tie-break, so serial and parallel runs agree.
pub fn repair(
    draft: &Procedure,
    constraints: &[PrecedenceConstraint],
    clusters: &[ClusterConstraint],
    w: &RepairWeights,
    search: &SearchParams,
    seed: u64,
) -> Result<RepairResult, RepairError> {
    let problem = Problem::new(draft, constraints, clusters, w)?;
    let n = problem.n;
    let identity: Vec<usize> = (0..n).collect();
    let draft_cost = problem.evaluate(&identity);
    let restarts = search.restarts.max(1);

    let start_for = |r: usize| -> Vec<usize> {
        if r == 0 {
            identity.clone()
        } else {
            let mut v = identity.clone();
            v.shuffle(&mut ChaCha8Rng::seed_from_u64(restart_seed(seed, r) ^ 0x5EED));
            v
        }
    };
    let run = |r: usize| run_restart(&problem, start_for(r), search.max_stale_iters, restart_seed(seed, r));
    let results: Vec<(Vec<usize>, CostBreakdown, u64)> = if search.parallel {
        (0..restarts).into_par_iter().map(run).collect()
    } else {
        (0..restarts).map(run).collect()
    };

    let iterations = results.iter().map(|r| r.2).sum();
    let (best_restart, (order, cost, _)) = results
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| better((&a.1, &a.0), (&b.1, &b.0)))
        .expect("at least one restart");
    Ok(RepairResult::from_order(
        draft,
        order,
        *cost,
        draft_cost,
        SearchTrace {
            iterations,
            restarts,
            best_restart,
            seed,
        },
    ))
}
