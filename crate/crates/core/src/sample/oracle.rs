use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SampleBatch, SampleError, SourceTag, TransitionSample};
use crate::template::{enumerate_states, MdpTemplate};
use crate::vocab::{ActionRef, Bindings, State};

/// Largest template state space the simulator will enumerate.
pub const STATE_LIMIT: u128 = 1 << 16;

/// Ground-truth dynamics for one concrete action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleAction {
    pub action: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: Bindings,
    #[serde(default)]
    pub preconditions: BTreeMap<String, String>,
    #[serde(default)]
    pub effects: BTreeMap<String, String>,
    /// When set, states violating the preconditions are never sampled for
    /// this action, so only successful transitions are observed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub suppress_invalid: bool,
}

impl OracleAction {
    pub fn action_ref(&self) -> ActionRef {
        ActionRef {
            id: self.action.clone(),
            params: self.params.clone(),
        }
    }
}

/// Test-time stand-in for a sample generator: exact preconditions and
/// effects per action. One spec may describe a whole laboratory; it is
/// projected onto each template before use.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub actions: Vec<OracleAction>,
}

impl OracleSpec {
    /// Keep only the template's actions, and only conditions and effects on
    /// the template's variables.
    pub fn project(&self, tpl: &MdpTemplate) -> OracleSpec {
        let keep_vars = |m: &BTreeMap<String, String>| -> BTreeMap<String, String> {
            m.iter()
                .filter(|(k, _)| tpl.variable(k).is_some())
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect()
        };
        let concrete = tpl.concrete_actions();
        OracleSpec {
            actions: self
                .actions
                .iter()
                .filter(|a| concrete.contains(&a.action_ref()))
                .map(|a| OracleAction {
                    action: a.action.clone(),
                    params: a.params.clone(),
                    preconditions: keep_vars(&a.preconditions),
                    effects: keep_vars(&a.effects),
                    suppress_invalid: a.suppress_invalid,
                })
                .collect(),
        }
    }

    pub fn entry(&self, action: &ActionRef) -> Option<&OracleAction> {
        self.actions.iter().find(|a| a.action == action.id && a.params == action.params)
    }

    /// Check that every template action is covered and every condition or
    /// effect names a template variable and a value in its domain.
    pub fn check(&self, tpl: &MdpTemplate) -> Result<(), SampleError> {
        for action in tpl.concrete_actions() {
            let entry = self
                .entry(&action)
                .ok_or_else(|| SampleError::ActionMissing(action.clone()))?;
            for (var, value) in entry.preconditions.iter().chain(entry.effects.iter()) {
                let tv = tpl.variable(var).ok_or_else(|| SampleError::InvalidOracle {
                    action: action.to_string(),
                    detail: format!("unknown variable `{var}`"),
                })?;
                if !tv.domain.contains(value) {
                    return Err(SampleError::InvalidOracle {
                        action: action.to_string(),
                        detail: format!("value not in domain: {var}={value}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Noise injected on top of the oracle's exact judgments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub reward_flip_rate: f64,
    pub effect_corrupt_rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn noiseless(seed: u64) -> Self {
        Self {
            reward_flip_rate: 0.0,
            effect_corrupt_rate: 0.0,
            seed,
        }
    }

    fn check(&self) -> Result<(), SampleError> {
        for (name, value) in [
            ("reward_flip_rate", self.reward_flip_rate),
            ("effect_corrupt_rate", self.effect_corrupt_rate),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SampleError::InvalidNoise { name, value });
            }
        }
        Ok(())
    }
}

/// Generate `n` samples from the oracle.
///
/// States are covered uniformly in stratified rounds: every round visits each
/// eligible `(state, action)` pair once in a seeded random order, and rounds
/// repeat until `n` samples exist. A pair is ineligible only when its action
/// suppresses invalid samples and the state fails the preconditions.
///
/// Successful actions apply their effects with reward 1; failing actions
/// leave the state unchanged with reward 0. Noise then flips the reward and,
/// independently, replaces the next state by a uniformly drawn legal state.
pub fn simulate_oracle(
    tpl: &MdpTemplate,
    oracle: &OracleSpec,
    n: usize,
    noise: &NoiseSpec,
) -> Result<SampleBatch, SampleError> {
    if n == 0 {
        return Err(SampleError::ZeroSamples);
    }
    noise.check()?;
    oracle.check(tpl)?;
    let states = enumerate_states(tpl, STATE_LIMIT)?;
    let actions: Vec<(ActionRef, &OracleAction)> = tpl
        .concrete_actions()
        .into_iter()
        .map(|a| {
            let entry = oracle.entry(&a).expect("checked above");
            (a, entry)
        })
        .collect();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (si, state) in states.iter().enumerate() {
        for (ai, (_, entry)) in actions.iter().enumerate() {
            if entry.suppress_invalid && !state.satisfies(&entry.preconditions) {
                continue;
            }
            pairs.push((si, ai));
        }
    }
    if pairs.is_empty() {
        return Err(SampleError::NothingToSample);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut schedule: Vec<(usize, usize)> = Vec::with_capacity(n + pairs.len());
    while schedule.len() < n {
        let mut round = pairs.clone();
        round.shuffle(&mut rng);
        schedule.extend(round);
    }
    schedule.truncate(n);

    let mut batch = SampleBatch::empty(tpl, SourceTag::Oracle);
    for (si, ai) in schedule {
        let state = &states[si];
        let (action, entry) = &actions[ai];
        let (mut next, mut reward) = if state.satisfies(&entry.preconditions) {
            (apply(state, &entry.effects), 1u8)
        } else {
            (state.clone(), 0u8)
        };
        // draw both channels for every sample so the streams stay aligned
        let flip = rng.gen::<f64>() < noise.reward_flip_rate;
        let corrupt = rng.gen::<f64>() < noise.effect_corrupt_rate;
        let replacement = rng.gen_range(0..states.len());
        if flip {
            reward = 1 - reward;
        }
        if corrupt {
            next = states[replacement].clone();
        }
        batch
            .samples
            .push(TransitionSample::new(state.clone(), action.clone(), next, reward));
    }
    Ok(batch)
}

fn apply(state: &State, effects: &BTreeMap<String, String>) -> State {
    let mut next = state.clone();
    for (var, value) in effects {
        next.set(var.clone(), value.clone());
    }
    next
}
