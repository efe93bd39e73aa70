//! Constraint-guided reordering of draft procedures.
//!
//! Causal rules are instantiated on concrete steps as precedence pairs, then
//! a permutation search trades draft preservation (position and adjacency
//! terms) against constraint violations.

mod brute;
mod mapping;
mod objective;
mod search;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::inventory::DomainInventory;
use crate::vocab::{ActionRef, Bindings};

pub use brute::{brute_force_repair, BRUTE_FORCE_LIMIT};
pub use mapping::{map_rules_to_constraints, MappingOutcome, UnmatchedRule};
pub use objective::{objective_cost, CostBreakdown, RawPenalty, RepairWeights};
pub use search::{repair, RepairResult, SearchParams, SearchTrace};

/// Marker action for steps that do not correspond to any inventory action.
pub const UNMAPPED: &str = "unmapped";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepairError {
    #[error("duplicate step id `{0}`")]
    DuplicateStep(String),
    #[error("procedure has no steps")]
    EmptyProcedure,
    #[error("step `{step}` uses unknown action `{action}`")]
    UnknownAction { step: String, action: String },
    #[error("constraint refers to unknown step `{0}`")]
    UnknownStep(String),
    #[error("constraint `{0}` has the same predecessor and successor")]
    SelfConstraint(String),
    #[error("cluster constraint `{0}` orders a cluster before itself")]
    SelfCluster(String),
    #[error("permutation is not a bijection over the draft steps: {0}")]
    NotBijective(String),
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("procedure has {n} steps; exhaustive search is limited to {limit}")]
    TooManySteps { n: usize, limit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub id: String,
    /// Inventory action id, or [`UNMAPPED`].
    pub action: String,
    #[serde(default, skip_serializing_if = "Bindings::is_empty")]
    pub params: Bindings,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<String>,
}

impl Step {
    pub fn new(id: impl Into<String>, action: ActionRef, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            action: action.id,
            params: action.params,
            text: text.into(),
            cluster: None,
        }
    }

    pub fn action_ref(&self) -> Option<ActionRef> {
        (self.action != UNMAPPED).then(|| ActionRef {
            id: self.action.clone(),
            params: self.params.clone(),
        })
    }

    pub fn matches(&self, action: &ActionRef) -> bool {
        self.action == action.id && self.params == action.params
    }
}

/// An ordered list of steps. Serialized as a bare JSON array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Procedure {
    pub steps: Vec<Step>,
}

impl Procedure {
    pub fn new(steps: Vec<Step>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.id.clone()).collect()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.id == id)
    }

    pub fn step(&self, id: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.id == id)
    }

    pub fn check_unique_ids(&self) -> Result<(), RepairError> {
        let mut seen = BTreeSet::new();
        for s in &self.steps {
            if !seen.insert(s.id.as_str()) {
                return Err(RepairError::DuplicateStep(s.id.clone()));
            }
        }
        Ok(())
    }

    /// Unique ids and every mapped action known to the inventory.
    pub fn check_against(&self, inv: &DomainInventory) -> Result<(), RepairError> {
        self.check_unique_ids()?;
        for s in &self.steps {
            if s.action != UNMAPPED && !inv.has_action(&s.action) {
                return Err(RepairError::UnknownAction {
                    step: s.id.clone(),
                    action: s.action.clone(),
                });
            }
        }
        Ok(())
    }

    /// Steps rearranged into the given id order.
    pub fn reordered(&self, order: &[String]) -> Result<Procedure, RepairError> {
        if order.len() != self.steps.len() {
            return Err(RepairError::NotBijective(format!(
                "{} ids for {} steps",
                order.len(),
                self.steps.len()
            )));
        }
        let mut used = BTreeSet::new();
        let mut steps = Vec::with_capacity(order.len());
        for id in order {
            let s = self
                .step(id)
                .ok_or_else(|| RepairError::NotBijective(format!("unknown step `{id}`")))?;
            if !used.insert(id.as_str()) {
                return Err(RepairError::NotBijective(format!("step `{id}` repeated")));
            }
            steps.push(s.clone());
        }
        Ok(Procedure { steps })
    }
}

/// Where a precedence constraint came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintOrigin {
    Manual,
    Rule {
        #[serde(flatten)]
        action: ActionRef,
        variable: String,
        value: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecedenceConstraint {
    pub predecessor: String,
    pub successor: String,
    pub origin: ConstraintOrigin,
}

impl PrecedenceConstraint {
    pub fn manual(predecessor: impl Into<String>, successor: impl Into<String>) -> Self {
        Self {
            predecessor: predecessor.into(),
            successor: successor.into(),
            origin: ConstraintOrigin::Manual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConstraint {
    pub earlier: String,
    pub later: String,
}

/// Contents of a constraints file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSet {
    pub raw: Vec<PrecedenceConstraint>,
    #[serde(default)]
    pub cluster: Vec<ClusterConstraint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched: Vec<UnmatchedRule>,
}

impl ConstraintSet {
    pub fn check(&self, proc: &Procedure) -> Result<(), RepairError> {
        for c in &self.raw {
            for id in [&c.predecessor, &c.successor] {
                if proc.position(id).is_none() {
                    return Err(RepairError::UnknownStep(id.clone()));
                }
            }
            if c.predecessor == c.successor {
                return Err(RepairError::SelfConstraint(c.predecessor.clone()));
            }
        }
        for c in &self.cluster {
            if c.earlier == c.later {
                return Err(RepairError::SelfCluster(c.earlier.clone()));
            }
        }
        Ok(())
    }
}
