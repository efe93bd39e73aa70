//! Tabular world model: samples grouped by exact `(state, action)` key, with
//! the observed next states, their counts and mean rewards.
//!
//! Rewards are kept as integer sums so that merging two models is exact and
//! equals aggregating the concatenated batches.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sample::SampleBatch;
use crate::template::MdpTemplate;
use crate::vocab::{ActionRef, Bindings, State};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldModelError {
    #[error("cannot merge world models of different templates (`{left}` vs `{right}`)")]
    TemplateMismatch { left: String, right: String },
    #[error("entry {index}: {message}")]
    Inconsistent { index: usize, message: String },
}

/// A variable of the template the model was built from, with its domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDomain {
    pub id: String,
    pub domain: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateActionKey {
    pub state: State,
    pub action: ActionRef,
}

impl StateActionKey {
    pub fn new(state: State, action: ActionRef) -> Self {
        Self { state, action }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeRecord {
    pub next_state: State,
    pub count: u64,
    pub reward_sum: u64,
}

impl OutcomeRecord {
    pub fn avg_reward(&self) -> f64 {
        self.reward_sum as f64 / self.count as f64
    }
}

/// Outcomes for one key, sorted by next state.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WorldModelEntry {
    pub outcomes: Vec<OutcomeRecord>,
}

impl WorldModelEntry {
    pub fn total_count(&self) -> u64 {
        self.outcomes.iter().map(|o| o.count).sum()
    }

    pub fn reward_sum(&self) -> u64 {
        self.outcomes.iter().map(|o| o.reward_sum).sum()
    }

    /// Count-weighted mean reward over every sample of the key.
    pub fn plausibility(&self) -> f64 {
        self.reward_sum() as f64 / self.total_count() as f64
    }

    pub fn probability(&self, outcome: &OutcomeRecord) -> f64 {
        outcome.count as f64 / self.total_count() as f64
    }

    fn add(&mut self, next_state: &State, count: u64, reward_sum: u64) {
        match self
            .outcomes
            .binary_search_by(|o| o.next_state.cmp(next_state))
        {
            Ok(i) => {
                self.outcomes[i].count += count;
                self.outcomes[i].reward_sum += reward_sum;
            }
            Err(i) => self.outcomes.insert(
                i,
                OutcomeRecord {
                    next_state: next_state.clone(),
                    count,
                    reward_sum,
                },
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldModel {
    /// Focal object of the source template.
    pub template: String,
    pub variables: Vec<VariableDomain>,
    pub entries: BTreeMap<StateActionKey, WorldModelEntry>,
}

impl WorldModel {
    pub fn empty(tpl: &MdpTemplate) -> Self {
        Self {
            template: tpl.focal_object.clone(),
            variables: tpl
                .variables
                .iter()
                .map(|v| VariableDomain {
                    id: v.id.clone(),
                    domain: v.domain.clone(),
                })
                .collect(),
            entries: BTreeMap::new(),
        }
    }

    pub fn domain(&self, var: &str) -> Option<&[String]> {
        self.variables
            .iter()
            .find(|v| v.id == var)
            .map(|v| v.domain.as_slice())
    }

    pub fn has_variable(&self, var: &str) -> bool {
        self.domain(var).is_some()
    }

    /// Total number of samples behind the model.
    pub fn sample_count(&self) -> u64 {
        self.entries.values().map(WorldModelEntry::total_count).sum()
    }

    pub fn add_batch(&mut self, batch: &SampleBatch) {
        for s in &batch.samples {
            self.entries
                .entry(StateActionKey::new(s.state.clone(), s.action_ref()))
                .or_default()
                .add(&s.next_state, 1, u64::from(s.reward));
        }
    }

    /// Combine two models of the same template.
    pub fn merge(&self, other: &WorldModel) -> Result<WorldModel, WorldModelError> {
        if self.template != other.template || self.variables != other.variables {
            return Err(WorldModelError::TemplateMismatch {
                left: self.template.clone(),
                right: other.template.clone(),
            });
        }
        let mut out = self.clone();
        for (key, entry) in &other.entries {
            let target = out.entries.entry(key.clone()).or_default();
            for o in &entry.outcomes {
                target.add(&o.next_state, o.count, o.reward_sum);
            }
        }
        Ok(out)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&WorldModelFile::from(self)).expect("world model serializes")
    }

    /// Decode the file form and check count/reward consistency.
    pub fn from_json_value(v: serde_json::Value) -> Result<WorldModel, String> {
        let file: WorldModelFile = serde_json::from_value(v).map_err(|e| e.to_string())?;
        WorldModel::try_from(file).map_err(|e| e.to_string())
    }
}

/// Group a batch by exact key and next state.
pub fn aggregate(batch: &SampleBatch, tpl: &MdpTemplate) -> WorldModel {
    let mut wm = WorldModel::empty(tpl);
    wm.add_batch(batch);
    wm
}

/// Exact-match lookup; `None` means the key was never sampled.
pub fn query_entry<'a>(wm: &'a WorldModel, key: &StateActionKey) -> Option<&'a WorldModelEntry> {
    wm.entries.get(key)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldModelFile {
    template: String,
    variables: Vec<VariableDomain>,
    entries: Vec<EntryFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    state: State,
    action: String,
    #[serde(default)]
    params: Bindings,
    total_count: u64,
    plausibility: f64,
    outcomes: Vec<OutcomeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeFile {
    next_state: State,
    count: u64,
    reward_sum: u64,
    probability: f64,
    avg_reward: f64,
}

impl From<&WorldModel> for WorldModelFile {
    fn from(wm: &WorldModel) -> Self {
        let entries = wm
            .entries
            .iter()
            .map(|(key, e)| EntryFile {
                state: key.state.clone(),
                action: key.action.id.clone(),
                params: key.action.params.clone(),
                total_count: e.total_count(),
                plausibility: e.plausibility(),
                outcomes: e
                    .outcomes
                    .iter()
                    .map(|o| OutcomeFile {
                        next_state: o.next_state.clone(),
                        count: o.count,
                        reward_sum: o.reward_sum,
                        probability: e.probability(o),
                        avg_reward: o.avg_reward(),
                    })
                    .collect(),
            })
            .collect();
        WorldModelFile {
            template: wm.template.clone(),
            variables: wm.variables.clone(),
            entries,
        }
    }
}

impl TryFrom<WorldModelFile> for WorldModel {
    type Error = WorldModelError;

    fn try_from(f: WorldModelFile) -> Result<Self, Self::Error> {
        let mut entries = BTreeMap::new();
        for (index, e) in f.entries.into_iter().enumerate() {
            let bad = |message: String| WorldModelError::Inconsistent { index, message };
            let mut entry = WorldModelEntry::default();
            for o in &e.outcomes {
                if o.count == 0 || o.reward_sum > o.count {
                    return Err(bad("outcome count must be positive and bound its reward sum".into()));
                }
                entry.add(&o.next_state, o.count, o.reward_sum);
            }
            if entry.outcomes.len() != e.outcomes.len() {
                return Err(bad("duplicate next_state among outcomes".into()));
            }
            if entry.total_count() != e.total_count {
                return Err(bad(format!(
                    "total_count {} does not match outcome counts {}",
                    e.total_count,
                    entry.total_count()
                )));
            }
            let key = StateActionKey::new(
                e.state,
                ActionRef {
                    id: e.action,
                    params: e.params,
                },
            );
            if entries.insert(key, entry).is_some() {
                return Err(bad("duplicate (state, action) key".into()));
            }
        }
        Ok(WorldModel {
            template: f.template,
            variables: f.variables,
            entries,
        })
    }
}
