//! Precondition and causal-rule extraction from world models.
//!
//! Entries are classified by plausibility, then each action's evidence is
//! scanned per variable value: values that dominate valid evidence become
//! required, values absent from valid evidence and backed by contrastive or
//! invalid-side evidence become forbidden. Required values are then linked to
//! the actions observed producing them.

mod causal;
mod evidence;
mod preconditions;

use serde::{Deserialize, Serialize};

pub use causal::{extract_causal_rules, find_producers, CausalRule, Producer, ProducerSearch};
pub use evidence::{
    classify, classify_entries, detect_contrast, support, ActionPools, EvidenceClass, EvidencePools, PooledEntry,
    Side,
};
pub use preconditions::{extract_preconditions, ConditionKind, Precondition, PreconditionSet, Strength};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuleError {
    #[error("invalid extraction config: {0}")]
    Config(String),
}

/// Thresholds for classification and extraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    pub theta_hi: f64,
    pub theta_lo: f64,
    pub gamma: f64,
    /// Tolerance for "valid support is approximately zero".
    pub epsilon0: f64,
    /// Minimum valid sample weight before an action gets required conditions.
    pub min_valid_weight: u64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            theta_hi: 0.8,
            theta_lo: 0.2,
            gamma: 0.9,
            epsilon0: 0.05,
            min_valid_weight: 3,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<(), RuleError> {
        let c = self;
        if !(0.0 <= c.theta_lo && c.theta_lo < c.theta_hi && c.theta_hi <= 1.0) {
            return Err(RuleError::Config(format!(
                "need 0 <= theta_lo < theta_hi <= 1, got theta_lo={} theta_hi={}",
                c.theta_lo, c.theta_hi
            )));
        }
        if !(0.5 < c.gamma && c.gamma <= 1.0) {
            return Err(RuleError::Config(format!("need 0.5 < gamma <= 1, got {}", c.gamma)));
        }
        if !(0.0 <= c.epsilon0 && c.epsilon0 < 1.0 - c.gamma) {
            return Err(RuleError::Config(format!(
                "need 0 <= epsilon0 < 1 - gamma, got epsilon0={} gamma={}",
                c.epsilon0, c.gamma
            )));
        }
        Ok(())
    }
}

/// What the extractor set aside instead of turning into rules.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionReport {
    pub ambiguous: Vec<AmbiguousCount>,
    pub insufficient_evidence: Vec<InsufficientEvidence>,
    pub suppressed_rules: Vec<SuppressedRule>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguousCount {
    pub template: String,
    #[serde(flatten)]
    pub action: crate::vocab::ActionRef,
    pub entries: u64,
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsufficientEvidence {
    pub template: String,
    #[serde(flatten)]
    pub action: crate::vocab::ActionRef,
    pub valid_weight: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuppressedRule {
    #[serde(flatten)]
    pub action: crate::vocab::ActionRef,
    pub variable: String,
    pub value: String,
    pub reason: String,
}

/// Contents of a rules file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    pub preconditions: Vec<Precondition>,
    pub causal_rules: Vec<CausalRule>,
    pub extraction_report: ExtractionReport,
}

impl RuleSet {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("rules serialize")
    }
}

/// Classify, extract preconditions and link producers over a set of world
/// models, one per template.
pub fn extract_rules(
    models: &[crate::world_model::WorldModel],
    inv: &crate::inventory::DomainInventory,
    cfg: &ExtractionConfig,
) -> Result<RuleSet, RuleError> {
    cfg.validate()?;
    let sets: Vec<PreconditionSet> = models
        .iter()
        .map(|wm| extract_preconditions(&classify_entries(wm, cfg), cfg))
        .collect();
    let mut report = ExtractionReport::default();
    for s in &sets {
        report.ambiguous.extend(s.ambiguous.iter().cloned());
        report.insufficient_evidence.extend(s.insufficient.iter().cloned());
    }
    let (causal_rules, suppressed) = extract_causal_rules(&sets, models, inv, cfg);
    report.suppressed_rules = suppressed;
    let preconditions = sets.into_iter().flat_map(|s| s.preconditions).collect();
    Ok(RuleSet {
        preconditions,
        causal_rules,
        extraction_report: report,
    })
}
