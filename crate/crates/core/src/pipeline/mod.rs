//! File-based stage orchestration.
//!
//! Each stage reads its inputs from the paths in [`PipelineConfig`],
//! validates them against their schemas, and writes its outputs atomically
//! with a manifest beside each artifact.

mod config;
mod io;
mod perturb;
mod stages;
mod tune;

use std::path::{Path, PathBuf};

pub use config::{Paths, PerturbConfig, PipelineConfig, SampleSourceKind, SamplingConfig};
pub use io::{derive_seed, manifest_path, sha256_hex, write_atomic, Manifest, TOOL_VERSION};
pub use perturb::{perturb, PerturbError, PerturbKind, PerturbMove, PerturbationLog, PerturbationSpec, SkippedPerturbation};
pub use stages::{run_stage, StageReport};
pub use tune::{format_ranking, tune, TuneRow, WeightGrid};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    /// Missing or invalid input artifact or configuration.
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Runtime(String),
}

impl PipelineError {
    pub fn invalid(path: &Path, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for validation failures, 2 for runtime errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid { .. } => 1,
            Self::Io { .. } | Self::Runtime(_) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Template,
    Sample,
    Aggregate,
    Extract,
    Map,
    Repair,
    Evaluate,
    Perturb,
    Tune,
    /// Template through evaluate, in pipeline order.
    All,
}

impl Stage {
    pub const PIPELINE: [Stage; 8] = [
        Stage::Template,
        Stage::Sample,
        Stage::Aggregate,
        Stage::Extract,
        Stage::Perturb,
        Stage::Map,
        Stage::Repair,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Template => "template",
            Stage::Sample => "sample",
            Stage::Aggregate => "aggregate",
            Stage::Extract => "extract",
            Stage::Map => "map",
            Stage::Repair => "repair",
            Stage::Evaluate => "evaluate",
            Stage::Perturb => "perturb",
            Stage::Tune => "tune",
            Stage::All => "all",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
