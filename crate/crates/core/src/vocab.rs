//! Shared vocabulary: complete state assignments and concrete action references.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Parameter bindings of a concrete action, keyed by parameter name.
pub type Bindings = BTreeMap<String, String>;

/// Sentinel value for empty receptors and containers.
pub const NONE_VALUE: &str = "none";

/// A complete assignment of template variables to symbolic values.
///
/// Backed by an ordered map so that equal assignments compare, hash and
/// serialize identically regardless of construction order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(BTreeMap<String, String>);

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn set(&mut self, var: impl Into<String>, value: impl Into<String>) {
        self.0.insert(var.into(), value.into());
    }

    pub fn with(mut self, var: impl Into<String>, value: impl Into<String>) -> Self {
        self.set(var, value);
        self
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// True when every `(var, value)` pair of `conditions` holds in this state.
    pub fn satisfies<'a>(&self, conditions: impl IntoIterator<Item = (&'a String, &'a String)>) -> bool {
        conditions
            .into_iter()
            .all(|(var, value)| self.get(var) == Some(value.as_str()))
    }

    /// Variables on which `self` and `other` disagree (over the union of keys).
    pub fn differing_vars<'a>(&'a self, other: &'a State) -> Vec<&'a str> {
        let mut out: Vec<&str> = self
            .0
            .iter()
            .filter(|(k, v)| other.0.get(*k) != Some(*v))
            .map(|(k, _)| k.as_str())
            .collect();
        for k in other.0.keys() {
            if !self.0.contains_key(k) {
                out.push(k.as_str());
            }
        }
        out
    }

    pub fn into_inner(self) -> BTreeMap<String, String> {
        self.0
    }
}

impl From<BTreeMap<String, String>> for State {
    fn from(map: BTreeMap<String, String>) -> Self {
        State(map)
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for State {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        State(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// A concrete action: identifier plus bound parameter values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionRef {
    #[serde(rename = "action")]
    pub id: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: Bindings,
}

impl ActionRef {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            params: Bindings::new(),
        }
    }

    pub fn with_param(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.params.insert(name.into(), value.into());
        self
    }
}

impl fmt::Display for ActionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.params.is_empty() {
            write!(f, "{}", self.id)
        } else {
            let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "{}({})", self.id, parts.join(","))
        }
    }
}
