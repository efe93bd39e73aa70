use std::cmp::Ordering;

use super::objective::Problem;
use super::search::{better, RepairResult, SearchTrace};
use super::{ClusterConstraint, PrecedenceConstraint, Procedure, RepairError, RepairWeights};

pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Advance to the next permutation in lexicographic order.
fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Exhaustive minimum of the repair objective, with the same tie-breaking as
/// the local search.
pub fn brute_force_repair(
    draft: &Procedure,
    constraints: &[PrecedenceConstraint],
    clusters: &[ClusterConstraint],
    w: &RepairWeights,
    limit: usize,
) -> Result<RepairResult, RepairError> {
    if draft.len() > limit {
        return Err(RepairError::TooManySteps { n: draft.len(), limit });
    }
    let problem = Problem::new(draft, constraints, clusters, w)?;
    let mut order: Vec<usize> = (0..problem.n).collect();
    let draft_cost = problem.evaluate(&order);
    let mut best = (order.clone(), draft_cost);
    let mut visited = 1u64;
    while next_permutation(&mut order) {
        visited += 1;
        let c = problem.evaluate(&order);
        if better((&c, &order), (&best.1, &best.0)) == Ordering::Less {
            best = (order.clone(), c);
        }
    }
    log::debug!("brute force visited {visited} permutations");
    Ok(RepairResult::from_order(
        draft,
        &best.0,
        best.1,
        draft_cost,
        SearchTrace {
            iterations: visited,
            restarts: 0,
            best_restart: 0,
            seed: 0,
        },
    ))
}
