//! JSON Schema validation for every file artifact the pipeline reads or writes.
//!
//! The schema documents live under `schemas/` at the repository root and are
//! compiled into the binary, so validation never touches the filesystem.

use std::sync::OnceLock;

use serde_json::Value;

macro_rules! schema_text {
    ($file:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemas/", $file))
    };
}

/// The artifact kinds with a published schema.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemaKind {
    Inventory,
    Template,
    Sample,
    Oracle,
    WorldModel,
    Rules,
    Procedure,
    Constraints,
    RepairResult,
    Metrics,
    Perturbation,
    Tune,
    Manifest,
}

impl SchemaKind {
    pub const ALL: [SchemaKind; 13] = [
        SchemaKind::Inventory,
        SchemaKind::Template,
        SchemaKind::Sample,
        SchemaKind::Oracle,
        SchemaKind::WorldModel,
        SchemaKind::Rules,
        SchemaKind::Procedure,
        SchemaKind::Constraints,
        SchemaKind::RepairResult,
        SchemaKind::Metrics,
        SchemaKind::Perturbation,
        SchemaKind::Tune,
        SchemaKind::Manifest,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            SchemaKind::Inventory => "inventory.schema.json",
            SchemaKind::Template => "template.schema.json",
            SchemaKind::Sample => "sample.schema.json",
            SchemaKind::Oracle => "oracle.schema.json",
            SchemaKind::WorldModel => "world_model.schema.json",
            SchemaKind::Rules => "rules.schema.json",
            SchemaKind::Procedure => "procedure.schema.json",
            SchemaKind::Constraints => "constraints.schema.json",
            SchemaKind::RepairResult => "repair_result.schema.json",
            SchemaKind::Metrics => "metrics.schema.json",
            SchemaKind::Perturbation => "perturbation.schema.json",
            SchemaKind::Tune => "tune.schema.json",
            SchemaKind::Manifest => "manifest.schema.json",
        }
    }

    fn text(self) -> &'static str {
        match self {
            SchemaKind::Inventory => schema_text!("inventory.schema.json"),
            SchemaKind::Template => schema_text!("template.schema.json"),
            SchemaKind::Sample => schema_text!("sample.schema.json"),
            SchemaKind::Oracle => schema_text!("oracle.schema.json"),
            SchemaKind::WorldModel => schema_text!("world_model.schema.json"),
            SchemaKind::Rules => schema_text!("rules.schema.json"),
            SchemaKind::Procedure => schema_text!("procedure.schema.json"),
            SchemaKind::Constraints => schema_text!("constraints.schema.json"),
            SchemaKind::RepairResult => schema_text!("repair_result.schema.json"),
            SchemaKind::Metrics => schema_text!("metrics.schema.json"),
            SchemaKind::Perturbation => schema_text!("perturbation.schema.json"),
            SchemaKind::Tune => schema_text!("tune.schema.json"),
            SchemaKind::Manifest => schema_text!("manifest.schema.json"),
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|k| *k == self).expect("listed")
    }
}

/// First schema violation found in a document.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("schema violation at {path}: {message}")]
pub struct SchemaViolation {
    /// JSON pointer into the offending document (`/` for the root).
    pub path: String,
    pub message: String,
}

fn validators() -> &'static [jsonschema::Validator] {
    static CELL: OnceLock<Vec<jsonschema::Validator>> = OnceLock::new();
    CELL.get_or_init(|| {
        SchemaKind::ALL
            .iter()
            .map(|kind| {
                let schema: Value = serde_json::from_str(kind.text())
                    .unwrap_or_else(|e| panic!("bundled {} is not JSON: {e}", kind.file_name()));
                jsonschema::validator_for(&schema)
                    .unwrap_or_else(|e| panic!("bundled {} does not compile: {e}", kind.file_name()))
            })
            .collect()
    })
}

/// Validate `doc` against the schema of `kind`, reporting the first violation.
pub fn validate(kind: SchemaKind, doc: &Value) -> Result<(), SchemaViolation> {
    let validator = &validators()[kind.index()];
    match validator.iter_errors(doc).next() {
        None => Ok(()),
        Some(err) => {
            let path = err.instance_path().to_string();
            Err(SchemaViolation {
                path: if path.is_empty() { "/".to_string() } else { path },
                message: err.to_string(),
            })
        }
    }
}

/// The raw schema document, for tools that want to publish or inspect it.
pub fn schema_document(kind: SchemaKind) -> &'static str {
    kind.text()
}
