use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::preconditions::{ConditionKind, PreconditionSet, Strength};
use super::{ExtractionConfig, SuppressedRule};
use crate::inventory::DomainInventory;
use crate::vocab::ActionRef;
use crate::world_model::WorldModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InitialMarker {
    #[serde(rename = "initial_state")]
    InitialState,
}

/// Something that can bring about a required value: the declared initial
/// state, or an action.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Producer {
    Initial(InitialMarker),
    Action(ActionRef),
}

impl Producer {
    pub const INITIAL: Producer = Producer::Initial(InitialMarker::InitialState);

    pub fn action(&self) -> Option<&ActionRef> {
        match self {
            Producer::Action(a) => Some(a),
            Producer::Initial(_) => None,
        }
    }

    pub fn is_initial(&self) -> bool {
        matches!(self, Producer::Initial(_))
    }
}

impl std::fmt::Display for Producer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Producer::Initial(_) => f.write_str("initial_state"),
            Producer::Action(a) => a.fmt(f),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProducerSearch {
    pub producers: Vec<Producer>,
    /// Actions observed changing the variable away from the value.
    pub destroyers: Vec<ActionRef>,
}

/// `B < A` for every producer `B` of a value required by `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalRule {
    #[serde(flatten)]
    pub action: ActionRef,
    pub variable: String,
    pub value: String,
    pub producers: Vec<Producer>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub destroyers: Vec<ActionRef>,
    pub strength: Strength,
    /// Templates the underlying required condition was extracted from.
    pub templates: Vec<String>,
}

impl CausalRule {
    /// Short human-readable reference.
    pub fn label(&self) -> String {
        format!("{} requires {}={}", self.action, self.variable, self.value)
    }
}

/// Producers of `var = value` across every model that has the variable.
///
/// An action produces the value when one of its valid entries has the
/// variable at another value and a rewarded outcome sets it. The declared
/// initial state counts as a producer when it assigns the value.
pub fn find_producers(
    var: &str,
    value: &str,
    models: &[WorldModel],
    inv: &DomainInventory,
    cfg: &ExtractionConfig,
) -> ProducerSearch {
    let mut producers: BTreeSet<Producer> = BTreeSet::new();
    let mut destroyers: BTreeSet<ActionRef> = BTreeSet::new();
    if inv.initial_assignments().get(var).map(String::as_str) == Some(value) {
        producers.insert(Producer::INITIAL);
    }
    for wm in models.iter().filter(|wm| wm.has_variable(var)) {
        for (key, entry) in &wm.entries {
            if entry.plausibility() < cfg.theta_hi {
                continue;
            }
            let before = key.state.get(var);
            for o in entry.outcomes.iter().filter(|o| o.avg_reward() >= cfg.theta_hi) {
                let after = o.next_state.get(var);
                if before != Some(value) && after == Some(value) {
                    producers.insert(Producer::Action(key.action.clone()));
                } else if before == Some(value) && after != Some(value) {
                    destroyers.insert(key.action.clone());
                }
            }
        }
    }
    ProducerSearch {
        producers: producers.into_iter().collect(),
        destroyers: destroyers.into_iter().collect(),
    }
}

/// One rule per (action, required value) across all templates. Duplicate
/// conditions from several templates merge; the rule is strong when any
/// template found it strong. Conditions without producers are returned as
/// suppressed.
pub fn extract_causal_rules(
    sets: &[PreconditionSet],
    models: &[WorldModel],
    inv: &DomainInventory,
    cfg: &ExtractionConfig,
) -> (Vec<CausalRule>, Vec<SuppressedRule>) {
    let mut grouped: BTreeMap<(ActionRef, String, String), (Strength, BTreeSet<String>)> = BTreeMap::new();
    for set in sets {
        for p in set.preconditions.iter().filter(|p| p.kind == ConditionKind::Required) {
            let strength = p.strength.unwrap_or(Strength::Weak);
            let slot = grouped
                .entry((p.action.clone(), p.variable.clone(), p.value.clone()))
                .or_insert((strength, BTreeSet::new()));
            if strength == Strength::Strong {
                slot.0 = Strength::Strong;
            }
            slot.1.insert(set.template.clone());
        }
    }

    let mut cache: BTreeMap<(String, String), ProducerSearch> = BTreeMap::new();
    let mut rules = Vec::new();
    let mut suppressed = Vec::new();
    for ((action, variable, value), (strength, templates)) in grouped {
        let search = cache
            .entry((variable.clone(), value.clone()))
            .or_insert_with(|| find_producers(&variable, &value, models, inv, cfg))
            .clone();
        if search.producers.is_empty() {
            log::info!("no producer for {variable}={value} required by {action}");
            suppressed.push(SuppressedRule {
                action,
                variable,
                value,
                reason: "no producing action and no initial assignment".into(),
            });
            continue;
        }
        rules.push(CausalRule {
            action,
            variable,
            value,
            producers: search.producers,
            destroyers: search.destroyers,
            strength,
            templates: templates.into_iter().collect(),
        });
    }
    (rules, suppressed)
}
