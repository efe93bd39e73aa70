//! Object-specific MDP templates.
//!
//! A template is the dictionary a sample generator works from: the focal
//! object's own variables and actions plus, for each interaction touching the
//! object, the partner-side variables the interaction reads or writes and one
//! interaction action. Context is closed over a single interaction hop.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::inventory::{DomainInventory, ParamDef};
use crate::vocab::{ActionRef, Bindings, State};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("inventory has unresolved dynamic domains; resolve them before building templates")]
    Unresolved,
    #[error("state space of template `{template}` has {size} states, above the limit of {limit}")]
    StateSpaceTooLarge { template: String, size: u128, limit: u128 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Own,
    Contextual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Control,
    Interaction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateVariable {
    pub id: String,
    pub domain: Vec<String>,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateAction {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<ParamDef>,
    pub kind: ActionKind,
}

impl TemplateAction {
    /// Every concrete binding of this action's parameters, in domain order.
    pub fn concrete(&self) -> Vec<ActionRef> {
        let mut out = vec![ActionRef::new(&self.id)];
        for p in &self.params {
            out = out
                .into_iter()
                .flat_map(|a| p.domain.iter().map(move |v| a.clone().with_param(&p.name, v)))
                .collect();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdpTemplate {
    pub focal_object: String,
    pub variables: Vec<TemplateVariable>,
    pub actions: Vec<TemplateAction>,
}

/// Why a state or action does not fit a template.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Mismatch {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("missing variable `{0}`")]
    MissingVariable(String),
    #[error("value not in domain: {var}={value}")]
    ValueNotInDomain { var: String, value: String },
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("parameter mismatch for `{action}`: {detail}")]
    Params { action: String, detail: String },
}

impl MdpTemplate {
    pub fn variable(&self, id: &str) -> Option<&TemplateVariable> {
        self.variables.iter().find(|v| v.id == id)
    }

    pub fn variable_ids(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.id.clone()).collect()
    }

    pub fn action(&self, id: &str) -> Option<&TemplateAction> {
        self.actions.iter().find(|a| a.id == id)
    }

    /// All concrete actions in template order.
    pub fn concrete_actions(&self) -> Vec<ActionRef> {
        self.actions.iter().flat_map(TemplateAction::concrete).collect()
    }

    /// Product of domain sizes, saturating.
    pub fn state_space_size(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain.len() as u128))
    }

    pub fn check_state(&self, state: &State) -> Result<(), Mismatch> {
        for (var, value) in state.iter() {
            let tv = self
                .variable(var)
                .ok_or_else(|| Mismatch::UnknownVariable(var.to_string()))?;
            if !tv.domain.iter().any(|d| d == value) {
                return Err(Mismatch::ValueNotInDomain {
                    var: var.to_string(),
                    value: value.to_string(),
                });
            }
        }
        if let Some(missing) = self.variables.iter().find(|v| state.get(&v.id).is_none()) {
            return Err(Mismatch::MissingVariable(missing.id.clone()));
        }
        Ok(())
    }

    pub fn check_action(&self, id: &str, params: &Bindings) -> Result<(), Mismatch> {
        let action = self
            .action(id)
            .ok_or_else(|| Mismatch::UnknownAction(id.to_string()))?;
        for name in params.keys() {
            if !action.params.iter().any(|p| &p.name == name) {
                return Err(Mismatch::Params {
                    action: id.to_string(),
                    detail: format!("unknown parameter `{name}`"),
                });
            }
        }
        for p in &action.params {
            match params.get(&p.name) {
                None => {
                    return Err(Mismatch::Params {
                        action: id.to_string(),
                        detail: format!("missing parameter `{}`", p.name),
                    })
                }
                Some(v) if !p.domain.contains(v) => {
                    return Err(Mismatch::Params {
                        action: id.to_string(),
                        detail: format!("value not in domain: {}={v}", p.name),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("template serializes")
    }
}

/// Build the template for one focal object of a resolved inventory.
pub fn build_template(inv: &DomainInventory, object_id: &str) -> Result<MdpTemplate, TemplateError> {
    if inv.object(object_id).is_none() {
        return Err(TemplateError::UnknownObject(object_id.to_string()));
    }
    if !inv.is_resolved() {
        return Err(TemplateError::Unresolved);
    }
    let all_vars = inv.variables();
    let domain_of = |id: &str| -> Vec<String> {
        all_vars
            .iter()
            .find(|v| v.id == id)
            .and_then(|v| v.domain.values().map(<[String]>::to_vec))
            .unwrap_or_default()
    };

    let own: BTreeSet<String> = all_vars
        .iter()
        .filter(|v| v.object == object_id)
        .map(|v| v.id.clone())
        .collect();
    let mut contextual: BTreeSet<String> = BTreeSet::new();
    let mut interaction_actions: Vec<TemplateAction> = Vec::new();
    for ix in inv.interactions.iter().filter(|ix| ix.involves(object_id)) {
        for var in inv.interaction_variables(ix) {
            if !own.contains(&var) {
                contextual.insert(var);
            }
        }
        interaction_actions.push(TemplateAction {
            id: ix.action_id(),
            params: Vec::new(),
            kind: ActionKind::Interaction,
        });
    }

    let variables = own
        .iter()
        .map(|id| (id, Origin::Own))
        .chain(contextual.iter().map(|id| (id, Origin::Contextual)))
        .map(|(id, origin)| TemplateVariable {
            id: id.clone(),
            domain: domain_of(id),
            origin,
        })
        .collect();

    let mut control: Vec<TemplateAction> = inv
        .actions()
        .into_iter()
        .filter(|a| a.object == object_id)
        .map(|a| TemplateAction {
            id: a.id,
            params: a.params,
            kind: ActionKind::Control,
        })
        .collect();
    control.sort_by(|a, b| a.id.cmp(&b.id));
    interaction_actions.sort_by(|a, b| a.id.cmp(&b.id));
    control.extend(interaction_actions);

    Ok(MdpTemplate {
        focal_object: object_id.to_string(),
        variables,
        actions: control,
    })
}

/// Templates for every object, in inventory order.
pub fn build_all_templates(inv: &DomainInventory) -> Result<Vec<MdpTemplate>, TemplateError> {
    inv.objects.iter().map(|o| build_template(inv, &o.id)).collect()
}

/// Cartesian product of the template's variable domains.
///
/// Ordering is lexicographic over (variable order, domain order), with the
/// last variable varying fastest.
pub fn enumerate_states(tpl: &MdpTemplate, limit: u128) -> Result<Vec<State>, TemplateError> {
    let size = tpl.state_space_size();
    if size > limit {
        return Err(TemplateError::StateSpaceTooLarge {
            template: tpl.focal_object.clone(),
            size,
            limit,
        });
    }
    let mut out = vec![State::new()];
    for var in &tpl.variables {
        out = out
            .into_iter()
            .flat_map(|s| var.domain.iter().map(move |v| s.clone().with(&var.id, v)))
            .collect();
    }
    Ok(out)
}
