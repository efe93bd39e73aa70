use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::schema::{self, SchemaKind};

pub const TOOL_VERSION: &str = concat!("procforge ", env!("CARGO_PKG_VERSION"));

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Seed for one stage, derived by hashing the master seed with the stage
/// name so stages draw independent streams.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Provenance written beside every artifact as `<artifact>.manifest.json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub artifact: String,
    pub stage: String,
    pub tool_version: String,
    pub seed: u64,
    pub stage_seed: u64,
    pub config_sha256: String,
    pub inputs: Vec<InputHash>,
    pub output_sha256: String,
    pub created_unix: u64,
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

/// Write via a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| PipelineError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| PipelineError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| PipelineError::io(path, e))?;
    tmp.flush().map_err(|e| PipelineError::io(path, e))?;
    tmp.persist(path).map_err(|e| PipelineError::io(path, e.error))?;
    Ok(())
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, PipelineError> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => PipelineError::invalid(path, "input artifact does not exist"),
        _ => PipelineError::io(path, e),
    })
}

/// Read a JSON artifact and check it against its schema.
pub fn read_json(path: &Path, kind: SchemaKind) -> Result<serde_json::Value, PipelineError> {
    let bytes = read_bytes(path)?;
    let value: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| PipelineError::invalid(path, format!("line {}, column {}: {e}", e.line(), e.column())))?;
    schema::validate(kind, &value).map_err(|v| PipelineError::invalid(path, v.to_string()))?;
    Ok(value)
}

pub fn decode<T: serde::de::DeserializeOwned>(path: &Path, value: serde_json::Value) -> Result<T, PipelineError> {
    serde_json::from_value(value).map_err(|e| PipelineError::invalid(path, e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("artifact serializes");
    out.push(b'\n');
    out
}

/// Shared per-run state used to stamp manifests.
pub struct ArtifactWriter<'a> {
    pub seed: u64,
    pub config_sha256: &'a str,
}

impl ArtifactWriter<'_> {
    pub fn write(
        &self,
        stage: &str,
        path: &Path,
        bytes: &[u8],
        inputs: &[PathBuf],
        schema_kind: Option<SchemaKind>,
    ) -> Result<(), PipelineError> {
        if let Some(kind) = schema_kind {
            let v: serde_json::Value = serde_json::from_slice(bytes).expect("artifact is JSON");
            schema::validate(kind, &v).map_err(|e| {
                PipelineError::Runtime(format!("{}: produced artifact violates its schema: {e}", path.display()))
            })?;
        }
        write_atomic(path, bytes)?;
        let mut hashed = Vec::with_capacity(inputs.len());
        for p in inputs {
            hashed.push(InputHash {
                path: p.display().to_string(),
                sha256: sha256_hex(&read_bytes(p)?),
            });
        }
        let manifest = Manifest {
            artifact: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            stage: stage.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            seed: self.seed,
            stage_seed: derive_seed(self.seed, stage),
            config_sha256: self.config_sha256.to_string(),
            inputs: hashed,
            output_sha256: sha256_hex(bytes),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mbytes = to_json_bytes(&manifest);
        let v: serde_json::Value = serde_json::from_slice(&mbytes).expect("manifest is JSON");
        schema::validate(SchemaKind::Manifest, &v)
            .map_err(|e| PipelineError::Runtime(format!("manifest violates its schema: {e}")))?;
        write_atomic(&manifest_path(path), &mbytes)
    }
}
