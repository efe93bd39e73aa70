use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::perturb::PerturbKind;
use super::tune::WeightGrid;
use super::PipelineError;
use crate::repair::{RepairWeights, SearchParams};
use crate::rules::ExtractionConfig;
use crate::sample::EndpointConfig;

/// Where samples come from in the `sample` stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSourceKind {
    #[default]
    Oracle,
    File,
    Endpoint,
}

impl std::str::FromStr for SampleSourceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(Self::Oracle),
            "file" => Ok(Self::File),
            "endpoint" => Ok(Self::Endpoint),
            other => Err(format!("unknown sample source `{other}` (oracle, file, endpoint)")),
        }
    }
}

/// Artifact locations. Relative paths resolve against the config file's
/// directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub inventory: PathBuf,
    pub oracle: PathBuf,
    pub templates_dir: PathBuf,
    /// Input JSONL files for the `file` sample source.
    pub sample_input_dir: PathBuf,
    pub samples_dir: PathBuf,
    pub world_models_dir: PathBuf,
    pub rules: PathBuf,
    pub truth: PathBuf,
    pub draft: PathBuf,
    pub perturbation_log: PathBuf,
    pub constraints: PathBuf,
    pub repair: PathBuf,
    pub metrics: PathBuf,
    pub tune: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            inventory: "inventory.json".into(),
            oracle: "oracle.json".into(),
            templates_dir: "out/templates".into(),
            sample_input_dir: "samples_in".into(),
            samples_dir: "out/samples".into(),
            world_models_dir: "out/world_models".into(),
            rules: "out/rules.json".into(),
            truth: "procedure_truth.json".into(),
            draft: "out/draft.json".into(),
            perturbation_log: "out/perturbation.json".into(),
            constraints: "out/constraints.json".into(),
            repair: "out/repair.json".into(),
            metrics: "out/metrics.json".into(),
            tune: "out/tune.json".into(),
        }
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.inventory,
            &mut self.oracle,
            &mut self.templates_dir,
            &mut self.sample_input_dir,
            &mut self.samples_dir,
            &mut self.world_models_dir,
            &mut self.rules,
            &mut self.truth,
            &mut self.draft,
            &mut self.perturbation_log,
            &mut self.constraints,
            &mut self.repair,
            &mut self.metrics,
            &mut self.tune,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub source: SampleSourceKind,
    pub n: usize,
    pub reward_flip_rate: f64,
    pub effect_corrupt_rate: f64,
    /// Focal objects to process; empty means every object.
    pub objects: Vec<String>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            source: SampleSourceKind::Oracle,
            n: 250,
            reward_flip_rate: 0.0,
            effect_corrupt_rate: 0.0,
            objects: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbConfig {
    pub n_misorderings: usize,
    pub kinds: Vec<PerturbKind>,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            n_misorderings: 6,
            kinds: vec![
                PerturbKind::EarlyTransferBeforeOpen,
                PerturbKind::EarlyClose,
                PerturbKind::LatePowerOn,
                PerturbKind::EarlyPowerOffBeforeReset,
                PerturbKind::GenericAdjacentSwap,
                PerturbKind::GenericReinsert,
            ],
        }
    }
}

/// One config file drives every stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub extraction: ExtractionConfig,
    #[serde(default)]
    pub repair: RepairWeights,
    #[serde(default)]
    pub search: SearchParams,
    #[serde(default)]
    pub perturb: PerturbConfig,
    #[serde(default)]
    pub tune: WeightGrid,
    #[serde(default)]
    pub endpoint: Option<EndpointConfig>,
}

impl PipelineConfig {
    /// Parse TOML or JSON (chosen by extension, `.json` for JSON) and
    /// resolve relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<(PipelineConfig, Vec<u8>), PipelineError> {
        let bytes = super::io::read_bytes(path)?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| PipelineError::invalid(path, "config is not UTF-8"))?;
        let mut cfg = Self::parse(text, path.extension().is_some_and(|e| e == "json"))
            .map_err(|m| PipelineError::invalid(path, m))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.paths.resolve(&base);
        Ok((cfg, bytes))
    }

    pub fn parse(text: &str, json: bool) -> Result<PipelineConfig, String> {
        let cfg: PipelineConfig = if json {
            serde_json::from_str(text).map_err(|e| e.to_string())?
        } else {
            toml::from_str(text).map_err(|e| e.to_string())?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.extraction.validate().map_err(|e| e.to_string())?;
        self.repair.validate().map_err(|e| e.to_string())?;
        if self.sampling.n == 0 {
            return Err("sampling.n must be at least 1".into());
        }
        for (name, v) in [
            ("reward_flip_rate", self.sampling.reward_flip_rate),
            ("effect_corrupt_rate", self.sampling.effect_corrupt_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("sampling.{name} must be in [0, 1], got {v}"));
            }
        }
        if self.perturb.n_misorderings == 0 {
            return Err("perturb.n_misorderings must be at least 1".into());
        }
        if self.search.restarts == 0 {
            return Err("search.restarts must be at least 1".into());
        }
        Ok(())
    }
}
