use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ConstraintOrigin, PrecedenceConstraint, Procedure, RepairError};
use crate::rules::CausalRule;
use crate::vocab::ActionRef;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnmatchedRule {
    #[serde(flatten)]
    pub action: ActionRef,
    pub variable: String,
    pub value: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MappingOutcome {
    pub constraints: Vec<PrecedenceConstraint>,
    pub unmatched: Vec<UnmatchedRule>,
}

/// Instantiate causal rules on the steps of a draft.
///
/// For every step `s` performing a rule's consumer action, in draft order:
/// - if the initial state produces the value and no step that destroys it
///   precedes `s`, the condition already holds and no constraint is needed;
/// - otherwise, if a producer step precedes `s`, the nearest one is
///   constrained before it;
/// - otherwise the earliest later producer step is constrained before `s`.
///
/// Checking the initial state first keeps a misplaced restoring step (a
/// `close` drafted before its `open`) from being read as the producer, which
/// would contradict the opposite rule and leave no feasible order.
///
/// Rules whose consumer never occurs, or that need a producer step the
/// procedure does not contain, are reported as unmatched. Identical
/// (predecessor, successor) pairs are emitted once.
pub fn map_rules_to_constraints(proc: &Procedure, rules: &[CausalRule]) -> Result<MappingOutcome, RepairError> {
    proc.check_unique_ids()?;
    let mut out = MappingOutcome::default();
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    for rule in rules {
        let unmatched = |reason: &str| UnmatchedRule {
            action: rule.action.clone(),
            variable: rule.variable.clone(),
            value: rule.value.clone(),
            reason: reason.to_string(),
        };
        let consumers: Vec<usize> = (0..proc.len())
            .filter(|&i| proc.steps[i].matches(&rule.action))
            .collect();
        if consumers.is_empty() {
            out.unmatched.push(unmatched("consumer action does not occur in the procedure"));
            continue;
        }
        let producer_actions: Vec<&ActionRef> = rule.producers.iter().filter_map(|p| p.action()).collect();
        let initial = rule.producers.iter().any(|p| p.is_initial());
        let producer_steps: Vec<usize> = (0..proc.len())
            .filter(|&i| producer_actions.iter().any(|a| proc.steps[i].matches(a)))
            .collect();
        let destroyer_steps: Vec<usize> = (0..proc.len())
            .filter(|&i| rule.destroyers.iter().any(|a| proc.steps[i].matches(a)))
            .collect();

        let mut missing_producer = false;
        for &c in &consumers {
            if initial && !destroyer_steps.iter().any(|&d| d < c) {
                continue;
            }
            let preceding = producer_steps.iter().copied().filter(|&p| p < c).max();
            let chosen = match preceding {
                Some(p) => Some(p),
                None => {
                    let later = producer_steps.iter().copied().find(|&p| p > c);
                    if later.is_none() {
                        missing_producer = true;
                    }
                    later
                }
            };
            let Some(p) = chosen else { continue };
            let pred = proc.steps[p].id.clone();
            let succ = proc.steps[c].id.clone();
            if seen.insert((pred.clone(), succ.clone())) {
                out.constraints.push(PrecedenceConstraint {
                    predecessor: pred,
                    successor: succ,
                    origin: ConstraintOrigin::Rule {
                        action: rule.action.clone(),
                        variable: rule.variable.clone(),
                        value: rule.value.clone(),
                    },
                });
            }
        }
        if missing_producer {
            out.unmatched.push(unmatched("no step performs a producer action"));
        }
    }
    Ok(out)
}
