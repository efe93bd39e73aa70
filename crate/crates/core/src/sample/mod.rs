//! Transition samples and the three interchangeable ways of obtaining them:
//! a ground-truth oracle simulator with noise injection, JSONL files, and a
//! remote text-generation endpoint.

mod endpoint;
mod ingest;
mod oracle;
mod prompt;

use serde::{Deserialize, Serialize};

use crate::template::{MdpTemplate, Mismatch, TemplateError};
use crate::vocab::{ActionRef, Bindings, State};

pub use endpoint::{fetch_samples, EndpointConfig, FetchOutcome, API_KEY_ENV};
pub use ingest::{ingest_samples, write_jsonl, IngestOutcome, Rejection};
pub use oracle::{simulate_oracle, NoiseSpec, OracleAction, OracleSpec, STATE_LIMIT};
pub use prompt::{build_prompt, PROMPT_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error("oracle has no entry for action `{0}`")]
    ActionMissing(ActionRef),
    #[error("oracle entry for `{action}` is invalid: {detail}")]
    InvalidOracle { action: String, detail: String },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("noise rate `{name}` = {value} is outside [0, 1]")]
    InvalidNoise { name: &'static str, value: f64 },
    #[error("requested sample count must be at least 1")]
    ZeroSamples,
    #[error("no (state, action) pair is eligible for sampling")]
    NothingToSample,
    #[error("line {line}: {reason}")]
    Rejected { line: usize, reason: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("transport error after {attempts} attempt(s): {detail}")]
    Transport { attempts: u32, detail: String },
    #[error("endpoint rejected credentials (HTTP {status})")]
    Auth { status: u16 },
    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unparseable endpoint response: {detail}")]
    Unparseable { detail: String, raw: String },
    #[error("invalid endpoint configuration: {0}")]
    Config(String),
}

/// Where a batch came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTag {
    Oracle,
    File,
    Endpoint,
}

/// One `(state, action, next_state, reward)` record. Serialized as a single
/// JSONL line with keys `state`, `action`, `params`, `next_state`, `reward`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSample {
    pub state: State,
    pub action: String,
    #[serde(default)]
    pub params: Bindings,
    pub next_state: State,
    pub reward: u8,
}

impl TransitionSample {
    pub fn new(state: State, action: ActionRef, next_state: State, reward: u8) -> Self {
        Self {
            state,
            action: action.id,
            params: action.params,
            next_state,
            reward,
        }
    }

    pub fn action_ref(&self) -> ActionRef {
        ActionRef {
            id: self.action.clone(),
            params: self.params.clone(),
        }
    }

    /// Check the sample against the template's variables, domains and actions.
    pub fn check(&self, tpl: &MdpTemplate) -> Result<(), Mismatch> {
        tpl.check_state(&self.state)?;
        tpl.check_action(&self.action, &self.params)?;
        tpl.check_state(&self.next_state)
    }
}

/// Samples for one template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBatch {
    /// Focal object of the template the samples belong to.
    pub template: String,
    /// Variable ids of that template, in template order.
    pub variables: Vec<String>,
    pub samples: Vec<TransitionSample>,
    pub source: SourceTag,
}

impl SampleBatch {
    pub fn empty(tpl: &MdpTemplate, source: SourceTag) -> Self {
        Self {
            template: tpl.focal_object.clone(),
            variables: tpl.variable_ids(),
            samples: Vec::new(),
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}
