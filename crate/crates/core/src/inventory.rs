//! Laboratory domain inventory: objects, components, state variables, actions
//! and interactions.
//!
//! Identifiers inside the document are local (`power`, `cap`, `state`); the
//! fully-qualified form used everywhere else is the dot-joined path
//! `object[.component].name`. Interactions are identified by
//! `<kind>:<source>-><target>[:material]`.
//!
//! Some variable domains are declared `"dynamic"` because their values depend
//! on which objects may be placed on a receptor or which materials may be
//! transferred into a container. [`resolve_dynamic_domains`] replaces those
//! markers using the declared interactions.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::schema::{self, SchemaKind};
use crate::vocab::NONE_VALUE;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InventoryError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("duplicate identifier `{id}` in {scope}")]
    DuplicateId { id: String, scope: String },
    #[error("dangling reference at {path}: `{reference}` does not name a declared {expected}")]
    DanglingReference {
        path: String,
        reference: String,
        expected: &'static str,
    },
    #[error("invalid value at {path}: {message}")]
    InvalidValue { path: String, message: String },
    #[error("cannot resolve dynamic domain of `{variable}`: no interaction targets it")]
    Unresolvable { variable: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Instrument,
    Container,
    Tool,
    Material,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Button,
    Display,
    Platform,
    Receptor,
    Selector,
    Cap,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    MoveToReceptor,
    TransferMaterial,
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InteractionKind::MoveToReceptor => "move_to_receptor",
            InteractionKind::TransferMaterial => "transfer_material",
        })
    }
}

/// Value domain of a state variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Explicit symbolic values.
    Values(Vec<String>),
    /// Placeholder to be derived from interactions.
    Dynamic,
    /// A formerly dynamic domain after resolution. Serialized as
    /// `{"resolved": [...]}` so resolved inventories keep the provenance.
    Resolved(Vec<String>),
}

impl Domain {
    /// Concrete values, or `None` while still dynamic.
    pub fn values(&self) -> Option<&[String]> {
        match self {
            Domain::Values(v) | Domain::Resolved(v) => Some(v),
            Domain::Dynamic => None,
        }
    }

    pub fn is_dynamic_origin(&self) -> bool {
        matches!(self, Domain::Dynamic | Domain::Resolved(_))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DomainRepr {
    Values(Vec<String>),
    Marker(DynamicMarker),
    Resolved { resolved: Vec<String> },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DynamicMarker {
    Dynamic,
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Domain::Values(v) => DomainRepr::Values(v.clone()),
            Domain::Dynamic => DomainRepr::Marker(DynamicMarker::Dynamic),
            Domain::Resolved(v) => DomainRepr::Resolved { resolved: v.clone() },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match DomainRepr::deserialize(d)? {
            DomainRepr::Values(v) => Domain::Values(v),
            DomainRepr::Marker(DynamicMarker::Dynamic) => Domain::Dynamic,
            DomainRepr::Resolved { resolved } => Domain::Resolved(resolved),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateVariable {
    pub id: String,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub domain: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDef {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<ParamDef>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub kind: ComponentKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<StateVariable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<ActionDef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabObject {
    pub id: String,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<Component>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<StateVariable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<ActionDef>,
    /// Keys are paths relative to the object: `var` or `component.var`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub initial_state: BTreeMap<String, String>,
}

impl LabObject {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub kind: InteractionKind,
    /// `object` or `object.component`.
    pub source: String,
    /// `object` or `object.component`.
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
}

impl Interaction {
    /// Deterministic action identifier: `<kind>:<source>-><target>[:material]`.
    pub fn action_id(&self) -> String {
        match &self.material {
            Some(m) => format!("{}:{}->{}:{}", self.kind, self.source, self.target, m),
            None => format!("{}:{}->{}", self.kind, self.source, self.target),
        }
    }

    pub fn source_object(&self) -> &str {
        object_part(&self.source)
    }

    pub fn target_object(&self) -> &str {
        object_part(&self.target)
    }

    pub fn involves(&self, object: &str) -> bool {
        self.source_object() == object || self.target_object() == object
    }
}

fn object_part(reference: &str) -> &str {
    reference.split('.').next().unwrap_or(reference)
}

/// Role a variable plays in interaction semantics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRole {
    Plain,
    /// Dynamic variable on a receptor component: which object sits there.
    Receptor,
    /// Dynamic variable elsewhere: which material is contained.
    Material,
}

/// Flattened view of one state variable with its fully-qualified id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub id: String,
    pub object: String,
    pub component: Option<String>,
    pub component_kind: Option<ComponentKind>,
    pub domain: Domain,
    pub role: VarRole,
}

/// Flattened view of one declared (non-interaction) action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionInfo {
    pub id: String,
    pub object: String,
    pub component: Option<String>,
    pub params: Vec<ParamDef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainInventory {
    pub schema_version: String,
    #[serde(default)]
    pub objects: Vec<LabObject>,
    #[serde(default)]
    pub interactions: Vec<Interaction>,
}

/// Parse and validate an inventory document.
///
/// Syntax errors carry line/column; schema violations carry the JSON pointer
/// of the offending field. Interaction references are normalized to
/// component level where the target is a receptor or a component-held
/// material. Dynamic domains are left unresolved.
pub fn parse_inventory(text: &str) -> Result<DomainInventory, InventoryError> {
    let value: Value = serde_json::from_str(text).map_err(|e| InventoryError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    schema::validate(SchemaKind::Inventory, &value).map_err(|v| InventoryError::Schema {
        path: v.path,
        message: v.message,
    })?;
    let mut inv: DomainInventory =
        serde_json::from_value(value).map_err(|e| InventoryError::Schema {
            path: "/".into(),
            message: e.to_string(),
        })?;
    inv.validate_structure()?;
    inv.normalize_interactions()?;
    inv.validate_initial_states()?;
    Ok(inv)
}

/// Replace every dynamic domain using the inventory's interactions.
///
/// A receptor variable gets `{none} ∪ {objects movable onto it}`; a material
/// variable gets `{none} ∪ {materials transferable into its owner}`.
/// Already-resolved and explicit domains are left untouched, which makes the
/// operation idempotent.
pub fn resolve_dynamic_domains(inv: &DomainInventory) -> Result<DomainInventory, InventoryError> {
    let mut out = inv.clone();
    let mut resolved: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for var in inv.variables() {
        if var.domain != Domain::Dynamic {
            continue;
        }
        let owner = match &var.component {
            Some(c) => format!("{}.{}", var.object, c),
            None => var.object.clone(),
        };
        let mut values: BTreeSet<String> = BTreeSet::new();
        for ix in &inv.interactions {
            match (var.role, ix.kind) {
                (VarRole::Receptor, InteractionKind::MoveToReceptor) if ix.target == owner => {
                    values.insert(ix.source_object().to_string());
                }
                (VarRole::Material, InteractionKind::TransferMaterial) if ix.target == owner => {
                    if let Some(m) = &ix.material {
                        values.insert(m.clone());
                    }
                }
                _ => {}
            }
        }
        values.remove(NONE_VALUE);
        if values.is_empty() {
            return Err(InventoryError::Unresolvable { variable: var.id });
        }
        let mut domain = vec![NONE_VALUE.to_string()];
        domain.extend(values);
        resolved.insert(var.id, domain);
    }

    for obj in &mut out.objects {
        for sv in &mut obj.states {
            if let Some(d) = resolved.get(&format!("{}.{}", obj.id, sv.id)) {
                sv.domain = Domain::Resolved(d.clone());
            }
        }
        for comp in &mut obj.components {
            for sv in &mut comp.states {
                if let Some(d) = resolved.get(&format!("{}.{}.{}", obj.id, comp.id, sv.id)) {
                    sv.domain = Domain::Resolved(d.clone());
                }
            }
        }
    }
    out.validate_initial_states()?;
    Ok(out)
}

impl DomainInventory {
    pub fn object(&self, id: &str) -> Option<&LabObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("inventory serializes")
    }

    pub fn is_resolved(&self) -> bool {
        self.variables().iter().all(|v| v.domain != Domain::Dynamic)
    }

    /// All state variables, object-level first, then component-level, in
    /// declaration order.
    pub fn variables(&self) -> Vec<VarInfo> {
        let mut out = Vec::new();
        for obj in &self.objects {
            for sv in &obj.states {
                out.push(VarInfo {
                    id: format!("{}.{}", obj.id, sv.id),
                    object: obj.id.clone(),
                    component: None,
                    component_kind: None,
                    domain: sv.domain.clone(),
                    role: if sv.domain.is_dynamic_origin() {
                        VarRole::Material
                    } else {
                        VarRole::Plain
                    },
                });
            }
            for comp in &obj.components {
                for sv in &comp.states {
                    let role = match (sv.domain.is_dynamic_origin(), comp.kind) {
                        (false, _) => VarRole::Plain,
                        (true, ComponentKind::Receptor) => VarRole::Receptor,
                        (true, _) => VarRole::Material,
                    };
                    out.push(VarInfo {
                        id: format!("{}.{}.{}", obj.id, comp.id, sv.id),
                        object: obj.id.clone(),
                        component: Some(comp.id.clone()),
                        component_kind: Some(comp.kind),
                        domain: sv.domain.clone(),
                        role,
                    });
                }
            }
        }
        out
    }

    pub fn variable(&self, id: &str) -> Option<VarInfo> {
        self.variables().into_iter().find(|v| v.id == id)
    }

    /// Declared actions of every object and component (interaction actions
    /// excluded).
    pub fn actions(&self) -> Vec<ActionInfo> {
        let mut out = Vec::new();
        for obj in &self.objects {
            for a in &obj.actions {
                out.push(ActionInfo {
                    id: format!("{}.{}", obj.id, a.id),
                    object: obj.id.clone(),
                    component: None,
                    params: a.params.clone(),
                });
            }
            for comp in &obj.components {
                for a in &comp.actions {
                    out.push(ActionInfo {
                        id: format!("{}.{}.{}", obj.id, comp.id, a.id),
                        object: obj.id.clone(),
                        component: Some(comp.id.clone()),
                        params: a.params.clone(),
                    });
                }
            }
        }
        out
    }

    /// True when `id` names a declared action or an interaction action.
    pub fn has_action(&self, id: &str) -> bool {
        self.actions().iter().any(|a| a.id == id)
            || self.interactions.iter().any(|ix| ix.action_id() == id)
    }

    /// Initial values declared by the inventory, keyed by qualified variable id.
    pub fn initial_assignments(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for obj in &self.objects {
            for (path, value) in &obj.initial_state {
                out.insert(format!("{}.{}", obj.id, path), value.clone());
            }
        }
        out
    }

    /// Variables an interaction reads or writes.
    ///
    /// Transfers touch the cap states of both endpoints plus the material
    /// variables at either end. Moves touch the target receptor plus every
    /// receptor the moved object could currently occupy.
    pub fn interaction_variables(&self, ix: &Interaction) -> Vec<String> {
        let vars = self.variables();
        let mut out: BTreeSet<String> = BTreeSet::new();
        match ix.kind {
            InteractionKind::TransferMaterial => {
                for endpoint in [&ix.source, &ix.target] {
                    let obj = object_part(endpoint);
                    for v in &vars {
                        if v.object != obj {
                            continue;
                        }
                        if v.component_kind == Some(ComponentKind::Cap) {
                            out.insert(v.id.clone());
                        }
                        if v.role == VarRole::Material && owner_ref(v) == *endpoint {
                            out.insert(v.id.clone());
                        }
                    }
                }
            }
            InteractionKind::MoveToReceptor => {
                let mover = ix.source_object();
                for v in &vars {
                    if v.role != VarRole::Receptor {
                        continue;
                    }
                    let holds_mover = v
                        .domain
                        .values()
                        .is_some_and(|d| d.iter().any(|x| x == mover));
                    if owner_ref(v) == ix.target || holds_mover {
                        out.insert(v.id.clone());
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    fn validate_structure(&self) -> Result<(), InventoryError> {
        let mut object_ids = HashSet::new();
        for (oi, obj) in self.objects.iter().enumerate() {
            check_ident(&obj.id, &format!("/objects/{oi}/id"))?;
            if !object_ids.insert(obj.id.as_str()) {
                return Err(InventoryError::DuplicateId {
                    id: obj.id.clone(),
                    scope: "objects".into(),
                });
            }
            let mut comp_ids = HashSet::new();
            for (ci, comp) in obj.components.iter().enumerate() {
                check_ident(&comp.id, &format!("/objects/{oi}/components/{ci}/id"))?;
                if !comp_ids.insert(comp.id.as_str()) {
                    return Err(InventoryError::DuplicateId {
                        id: format!("{}.{}", obj.id, comp.id),
                        scope: format!("components of `{}`", obj.id),
                    });
                }
                let base = format!("/objects/{oi}/components/{ci}");
                let scope = format!("{}.{}", obj.id, comp.id);
                validate_vars(&comp.states, &base, &scope)?;
                validate_actions(&comp.actions, &base, &scope)?;
            }
            let base = format!("/objects/{oi}");
            validate_vars(&obj.states, &base, &obj.id)?;
            validate_actions(&obj.actions, &base, &obj.id)?;
        }
        for (ii, ix) in self.interactions.iter().enumerate() {
            for (field, reference) in [("source", &ix.source), ("target", &ix.target)] {
                self.check_ref(reference, &format!("/interactions/{ii}/{field}"))?;
            }
            if ix.kind == InteractionKind::TransferMaterial && ix.material.is_none() {
                return Err(InventoryError::InvalidValue {
                    path: format!("/interactions/{ii}"),
                    message: "transfer_material requires a `material`".into(),
                });
            }
        }
        Ok(())
    }

    fn check_ref(&self, reference: &str, path: &str) -> Result<(), InventoryError> {
        let mut parts = reference.splitn(2, '.');
        let obj_id = parts.next().unwrap_or_default();
        let obj = self.object(obj_id).ok_or_else(|| InventoryError::DanglingReference {
            path: path.to_string(),
            reference: reference.to_string(),
            expected: "object",
        })?;
        if let Some(comp) = parts.next() {
            if obj.component(comp).is_none() {
                return Err(InventoryError::DanglingReference {
                    path: path.to_string(),
                    reference: reference.to_string(),
                    expected: "component",
                });
            }
        }
        Ok(())
    }

    /// Rewrite interaction endpoints to component level where one exists:
    /// move targets become the object's receptor, transfer endpoints become
    /// the owner of the object's material variable.
    fn normalize_interactions(&mut self) -> Result<(), InventoryError> {
        let vars = self.variables();
        let mut seen = HashSet::new();
        for ii in 0..self.interactions.len() {
            let ix = self.interactions[ii].clone();
            let path = format!("/interactions/{ii}");
            let mut normalized = ix.clone();
            match ix.kind {
                InteractionKind::MoveToReceptor => {
                    let obj = self.object(ix.target_object()).expect("checked");
                    let receptors: Vec<&Component> = obj
                        .components
                        .iter()
                        .filter(|c| c.kind == ComponentKind::Receptor)
                        .collect();
                    if ix.target.contains('.') {
                        let comp = obj.component(&ix.target[obj.id.len() + 1..]).expect("checked");
                        if comp.kind != ComponentKind::Receptor {
                            return Err(InventoryError::InvalidValue {
                                path: format!("{path}/target"),
                                message: format!("`{}` is not a receptor component", ix.target),
                            });
                        }
                    } else if receptors.len() == 1 {
                        normalized.target = format!("{}.{}", obj.id, receptors[0].id);
                    } else {
                        return Err(InventoryError::InvalidValue {
                            path: format!("{path}/target"),
                            message: format!(
                                "`{}` has {} receptor components; name one explicitly",
                                ix.target,
                                receptors.len()
                            ),
                        });
                    }
                    let target = normalized.target.clone();
                    let has_receptor_var = vars
                        .iter()
                        .any(|v| v.role == VarRole::Receptor && owner_ref(v) == target);
                    if !has_receptor_var {
                        return Err(InventoryError::InvalidValue {
                            path: format!("{path}/target"),
                            message: format!("receptor `{target}` declares no dynamic occupant variable"),
                        });
                    }
                }
                InteractionKind::TransferMaterial => {
                    for (field, endpoint) in [("source", &mut normalized.source), ("target", &mut normalized.target)] {
                        if endpoint.contains('.') {
                            continue;
                        }
                        let owners: Vec<String> = vars
                            .iter()
                            .filter(|v| v.role == VarRole::Material && v.object == *endpoint)
                            .map(owner_ref)
                            .collect();
                        match owners.as_slice() {
                            [single] => *endpoint = single.clone(),
                            [] => {}
                            _ => {
                                return Err(InventoryError::InvalidValue {
                                    path: format!("{path}/{field}"),
                                    message: format!(
                                        "`{endpoint}` holds several material variables; name the component"
                                    ),
                                })
                            }
                        }
                    }
                    let target = normalized.target.clone();
                    let has_material = vars
                        .iter()
                        .any(|v| v.role == VarRole::Material && owner_ref(v) == target);
                    if !has_material {
                        return Err(InventoryError::InvalidValue {
                            path: format!("{path}/target"),
                            message: format!("transfer target `{target}` declares no dynamic material variable"),
                        });
                    }
                }
            }
            if !seen.insert(normalized.action_id()) {
                return Err(InventoryError::DuplicateId {
                    id: normalized.action_id(),
                    scope: "interactions".into(),
                });
            }
            self.interactions[ii] = normalized;
        }
        Ok(())
    }

    fn validate_initial_states(&self) -> Result<(), InventoryError> {
        let vars = self.variables();
        for (oi, obj) in self.objects.iter().enumerate() {
            for (path, value) in &obj.initial_state {
                let ptr = format!("/objects/{oi}/initial_state/{path}");
                let qualified = format!("{}.{}", obj.id, path);
                let var = vars.iter().find(|v| v.id == qualified).ok_or_else(|| {
                    InventoryError::DanglingReference {
                        path: ptr.clone(),
                        reference: path.clone(),
                        expected: "state variable",
                    }
                })?;
                if let Some(domain) = var.domain.values() {
                    if !domain.contains(value) {
                        return Err(InventoryError::InvalidValue {
                            path: ptr,
                            message: format!("`{value}` is not in the domain of `{qualified}`"),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn owner_ref(v: &VarInfo) -> String {
    match &v.component {
        Some(c) => format!("{}.{}", v.object, c),
        None => v.object.clone(),
    }
}

fn check_ident(id: &str, path: &str) -> Result<(), InventoryError> {
    if id.is_empty() || id.contains('.') || id.contains(':') || id.contains("->") {
        return Err(InventoryError::InvalidValue {
            path: path.to_string(),
            message: format!("`{id}` is not a valid local identifier (no `.`, `:` or `->`)"),
        });
    }
    Ok(())
}

fn check_unique_values(values: &[String], path: &str, what: &str) -> Result<(), InventoryError> {
    if values.is_empty() {
        return Err(InventoryError::InvalidValue {
            path: path.to_string(),
            message: format!("{what} must be non-empty"),
        });
    }
    let mut seen = HashSet::new();
    for v in values {
        if !seen.insert(v) {
            return Err(InventoryError::DuplicateId {
                id: v.clone(),
                scope: format!("{what} at {path}"),
            });
        }
    }
    Ok(())
}

fn validate_vars(vars: &[StateVariable], base: &str, scope: &str) -> Result<(), InventoryError> {
    let mut ids = HashSet::new();
    for (i, sv) in vars.iter().enumerate() {
        let path = format!("{base}/states/{i}");
        check_ident(&sv.id, &format!("{path}/id"))?;
        if !ids.insert(sv.id.as_str()) {
            return Err(InventoryError::DuplicateId {
                id: format!("{scope}.{}", sv.id),
                scope: format!("state variables of `{scope}`"),
            });
        }
        if let Some(values) = sv.domain.values() {
            check_unique_values(values, &format!("{path}/domain"), "domain")?;
        }
    }
    Ok(())
}

fn validate_actions(actions: &[ActionDef], base: &str, scope: &str) -> Result<(), InventoryError> {
    let mut ids = HashSet::new();
    for (i, a) in actions.iter().enumerate() {
        let path = format!("{base}/actions/{i}");
        check_ident(&a.id, &format!("{path}/id"))?;
        if !ids.insert(a.id.as_str()) {
            return Err(InventoryError::DuplicateId {
                id: format!("{scope}.{}", a.id),
                scope: format!("actions of `{scope}`"),
            });
        }
        let mut names = HashSet::new();
        for (pi, p) in a.params.iter().enumerate() {
            if !names.insert(p.name.as_str()) {
                return Err(InventoryError::DuplicateId {
                    id: p.name.clone(),
                    scope: format!("parameters of `{scope}.{}`", a.id),
                });
            }
            check_unique_values(&p.domain, &format!("{path}/params/{pi}/domain"), "parameter domain")?;
        }
    }
    Ok(())
}
