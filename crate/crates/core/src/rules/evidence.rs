use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ExtractionConfig;
use crate::vocab::{ActionRef, State};
use crate::world_model::{VariableDomain, WorldModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceClass {
    Valid,
    Invalid,
    Ambiguous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Valid,
    Invalid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PooledEntry {
    pub state: State,
    pub weight: u64,
    pub plausibility: f64,
}

/// World-model entries of one concrete action, split by classification.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActionPools {
    pub valid: Vec<PooledEntry>,
    pub invalid: Vec<PooledEntry>,
    pub ambiguous: Vec<PooledEntry>,
}

impl ActionPools {
    pub fn side(&self, side: Side) -> &[PooledEntry] {
        match side {
            Side::Valid => &self.valid,
            Side::Invalid => &self.invalid,
        }
    }

    pub fn weight(entries: &[PooledEntry]) -> u64 {
        entries.iter().map(|e| e.weight).sum()
    }

    pub fn total_weight(&self) -> u64 {
        Self::weight(&self.valid) + Self::weight(&self.invalid) + Self::weight(&self.ambiguous)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvidencePools {
    pub template: String,
    pub variables: Vec<VariableDomain>,
    pub actions: BTreeMap<ActionRef, ActionPools>,
}

pub fn classify(plausibility: f64, cfg: &ExtractionConfig) -> EvidenceClass {
    if plausibility >= cfg.theta_hi {
        EvidenceClass::Valid
    } else if plausibility <= cfg.theta_lo {
        EvidenceClass::Invalid
    } else {
        EvidenceClass::Ambiguous
    }
}

/// Split every entry of the model into valid, invalid or ambiguous evidence,
/// weighted by its sample count.
pub fn classify_entries(wm: &WorldModel, cfg: &ExtractionConfig) -> EvidencePools {
    let mut actions: BTreeMap<ActionRef, ActionPools> = BTreeMap::new();
    for (key, entry) in &wm.entries {
        let p = entry.plausibility();
        let pooled = PooledEntry {
            state: key.state.clone(),
            weight: entry.total_count(),
            plausibility: p,
        };
        let pools = actions.entry(key.action.clone()).or_default();
        match classify(p, cfg) {
            EvidenceClass::Valid => pools.valid.push(pooled),
            EvidenceClass::Invalid => pools.invalid.push(pooled),
            EvidenceClass::Ambiguous => pools.ambiguous.push(pooled),
        }
    }
    EvidencePools {
        template: wm.template.clone(),
        variables: wm.variables.clone(),
        actions,
    }
}

/// Weighted fraction of one side's evidence whose state has `var = value`.
/// `None` when that side holds no evidence for the action.
pub fn support(pools: &EvidencePools, action: &ActionRef, var: &str, value: &str, side: Side) -> Option<f64> {
    let entries = pools.actions.get(action)?.side(side);
    let total = ActionPools::weight(entries);
    if total == 0 {
        return None;
    }
    let hit: u64 = entries
        .iter()
        .filter(|e| e.state.get(var) == Some(value))
        .map(|e| e.weight)
        .sum();
    Some(hit as f64 / total as f64)
}

/// Number of (valid, invalid) entry pairs whose states differ only in `var`,
/// with the invalid one holding `var = value`.
pub fn detect_contrast(pools: &EvidencePools, action: &ActionRef, var: &str, value: &str) -> u64 {
    let Some(p) = pools.actions.get(action) else {
        return 0;
    };
    let rest = |s: &State| -> Vec<(String, String)> {
        s.iter()
            .filter(|(k, _)| *k != var)
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    };
    let mut valid_by_rest: HashMap<Vec<(String, String)>, u64> = HashMap::new();
    for e in &p.valid {
        if e.state.get(var) != Some(value) {
            *valid_by_rest.entry(rest(&e.state)).or_default() += 1;
        }
    }
    p.invalid
        .iter()
        .filter(|e| e.state.get(var) == Some(value))
        .map(|e| valid_by_rest.get(&rest(&e.state)).copied().unwrap_or(0))
        .sum()
}
