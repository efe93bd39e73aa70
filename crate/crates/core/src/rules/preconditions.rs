use serde::{Deserialize, Serialize};

use super::evidence::{detect_contrast, support, ActionPools, EvidencePools, Side};
use super::{AmbiguousCount, ExtractionConfig, InsufficientEvidence};
use crate::vocab::ActionRef;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    Required,
    Forbidden,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Strong,
    Weak,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Precondition {
    pub template: String,
    #[serde(flatten)]
    pub action: ActionRef,
    pub variable: String,
    pub value: String,
    pub kind: ConditionKind,
    /// Set for required conditions only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<Strength>,
    pub valid_support: Option<f64>,
    pub invalid_support: Option<f64>,
    pub contrast: u64,
}

/// Preconditions of one template plus what was set aside.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PreconditionSet {
    pub template: String,
    pub preconditions: Vec<Precondition>,
    pub ambiguous: Vec<AmbiguousCount>,
    pub insufficient: Vec<InsufficientEvidence>,
}

impl PreconditionSet {
    pub fn for_action<'a>(&'a self, action: &'a ActionRef) -> impl Iterator<Item = &'a Precondition> {
        self.preconditions.iter().filter(move |p| &p.action == action)
    }

    pub fn required<'a>(&'a self, action: &'a ActionRef) -> impl Iterator<Item = &'a Precondition> {
        self.for_action(action).filter(|p| p.kind == ConditionKind::Required)
    }

    pub fn forbidden<'a>(&'a self, action: &'a ActionRef) -> impl Iterator<Item = &'a Precondition> {
        self.for_action(action).filter(|p| p.kind == ConditionKind::Forbidden)
    }
}

/// Required and forbidden values per action and variable.
///
/// A value is required when its valid support reaches `gamma` and every
/// other value of the variable stays at or below `1 - gamma`. It is
/// forbidden when its valid support is at most `epsilon0` and it has either
/// a one-value contrast or invalid support of at least `gamma`. Required
/// values are strong when all alternatives are forbidden. Actions whose valid
/// weight is below `min_valid_weight` get no required values.
pub fn extract_preconditions(pools: &EvidencePools, cfg: &ExtractionConfig) -> PreconditionSet {
    let mut out = PreconditionSet {
        template: pools.template.clone(),
        ..Default::default()
    };
    for (action, p) in &pools.actions {
        if !p.ambiguous.is_empty() {
            out.ambiguous.push(AmbiguousCount {
                template: pools.template.clone(),
                action: action.clone(),
                entries: p.ambiguous.len() as u64,
                weight: ActionPools::weight(&p.ambiguous),
            });
        }
        let valid_weight = ActionPools::weight(&p.valid);
        let enough = valid_weight >= cfg.min_valid_weight && valid_weight > 0;
        if !enough {
            out.insufficient.push(InsufficientEvidence {
                template: pools.template.clone(),
                action: action.clone(),
                valid_weight,
            });
        }
        for var in &pools.variables {
            let stats: Vec<(String, Option<f64>, Option<f64>, u64)> = var
                .domain
                .iter()
                .map(|v| {
                    (
                        v.clone(),
                        support(pools, action, &var.id, v, Side::Valid),
                        support(pools, action, &var.id, v, Side::Invalid),
                        detect_contrast(pools, action, &var.id, v),
                    )
                })
                .collect();
            let forbidden: Vec<bool> = stats
                .iter()
                .map(|(_, vs, is, c)| {
                    vs.is_some_and(|s| s <= cfg.epsilon0) && (*c > 0 || is.is_some_and(|s| s >= cfg.gamma))
                })
                .collect();
            for (i, (value, vs, is, contrast)) in stats.iter().enumerate() {
                let required = enough
                    && vs.is_some_and(|s| s >= cfg.gamma)
                    && stats
                        .iter()
                        .enumerate()
                        .all(|(j, (_, other, _, _))| j == i || other.is_some_and(|s| s <= 1.0 - cfg.gamma));
                assert!(
                    !(required && forbidden[i]),
                    "{action} {}={value} both required and forbidden",
                    var.id
                );
                let kind = if required {
                    ConditionKind::Required
                } else if forbidden[i] {
                    ConditionKind::Forbidden
                } else {
                    continue;
                };
                let strength = required.then(|| {
                    if forbidden.iter().enumerate().all(|(j, f)| j == i || *f) {
                        Strength::Strong
                    } else {
                        Strength::Weak
                    }
                });
                out.preconditions.push(Precondition {
                    template: pools.template.clone(),
                    action: action.clone(),
                    variable: var.id.clone(),
                    value: value.clone(),
                    kind,
                    strength,
                    valid_support: *vs,
                    invalid_support: *is,
                    contrast: *contrast,
                });
            }
        }
    }
    out
}
