use std::path::{Path, PathBuf};

use super::io::{decode, derive_seed, read_bytes, read_json, sha256_hex, to_json_bytes, ArtifactWriter};
use super::perturb::{perturb, PerturbationSpec};
use super::tune::{format_ranking, tune};
use super::{PipelineConfig, PipelineError, SampleSourceKind, Stage};
use crate::inventory::{parse_inventory, resolve_dynamic_domains, DomainInventory};
use crate::metrics;
use crate::repair::{map_rules_to_constraints, repair, ConstraintSet, Procedure, RepairResult};
use crate::rules::{extract_rules, RuleSet};
use crate::sample::{
    build_prompt, fetch_samples, ingest_samples, simulate_oracle, write_jsonl, NoiseSpec, OracleSpec, SampleError,
    SourceTag,
};
use crate::schema::SchemaKind;
use crate::template::{build_template, MdpTemplate};
use crate::world_model::{aggregate, WorldModel};

/// What a stage wrote.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StageReport {
    pub artifacts: Vec<PathBuf>,
    pub notes: Vec<String>,
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    writer: ArtifactWriter<'a>,
    strict: bool,
    report: StageReport,
}

impl Ctx<'_> {
    fn write(
        &mut self,
        stage: Stage,
        path: &Path,
        bytes: &[u8],
        inputs: &[PathBuf],
        kind: Option<SchemaKind>,
    ) -> Result<(), PipelineError> {
        self.writer.write(stage.name(), path, bytes, inputs, kind)?;
        self.report.artifacts.push(path.to_path_buf());
        Ok(())
    }

    fn note(&mut self, msg: String) {
        log::info!("{msg}");
        self.report.notes.push(msg);
    }
}

/// Run one stage (or `all`) over the artifacts named in `cfg`.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig, config_bytes: &[u8], strict: bool) -> Result<StageReport, PipelineError> {
    cfg.validate().map_err(PipelineError::Runtime)?;
    let config_sha = sha256_hex(config_bytes);
    let mut ctx = Ctx {
        cfg,
        writer: ArtifactWriter {
            seed: cfg.seed,
            config_sha256: &config_sha,
        },
        strict,
        report: StageReport::default(),
    };
    let stages: Vec<Stage> = if stage == Stage::All {
        Stage::PIPELINE.to_vec()
    } else {
        vec![stage]
    };
    for s in stages {
        log::info!("stage {s}");
        match s {
            Stage::Template => stage_template(&mut ctx)?,
            Stage::Sample => stage_sample(&mut ctx)?,
            Stage::Aggregate => stage_aggregate(&mut ctx)?,
            Stage::Extract => stage_extract(&mut ctx)?,
            Stage::Perturb => stage_perturb(&mut ctx)?,
            Stage::Map => stage_map(&mut ctx)?,
            Stage::Repair => stage_repair(&mut ctx)?,
            Stage::Evaluate => stage_evaluate(&mut ctx)?,
            Stage::Tune => stage_tune(&mut ctx)?,
            Stage::All => unreachable!("expanded above"),
        }
    }
    Ok(ctx.report)
}

fn load_inventory(path: &Path) -> Result<DomainInventory, PipelineError> {
    let bytes = read_bytes(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| PipelineError::invalid(path, "not UTF-8"))?;
    let inv = parse_inventory(text).map_err(|e| PipelineError::invalid(path, e.to_string()))?;
    resolve_dynamic_domains(&inv).map_err(|e| PipelineError::invalid(path, e.to_string()))
}

fn objects(cfg: &PipelineConfig, inv: &DomainInventory) -> Result<Vec<String>, PipelineError> {
    if cfg.sampling.objects.is_empty() {
        return Ok(inv.objects.iter().map(|o| o.id.clone()).collect());
    }
    for o in &cfg.sampling.objects {
        if inv.object(o).is_none() {
            return Err(PipelineError::invalid(&cfg.paths.inventory, format!("unknown object `{o}` in sampling.objects")));
        }
    }
    Ok(cfg.sampling.objects.clone())
}

fn template_path(cfg: &PipelineConfig, obj: &str) -> PathBuf {
    cfg.paths.templates_dir.join(format!("{obj}.json"))
}

fn samples_path(cfg: &PipelineConfig, obj: &str) -> PathBuf {
    cfg.paths.samples_dir.join(format!("{obj}.jsonl"))
}

fn world_model_path(cfg: &PipelineConfig, obj: &str) -> PathBuf {
    cfg.paths.world_models_dir.join(format!("{obj}.json"))
}

fn load_template(path: &Path) -> Result<MdpTemplate, PipelineError> {
    decode(path, read_json(path, SchemaKind::Template)?)
}

fn load_procedure(path: &Path, inv: &DomainInventory) -> Result<Procedure, PipelineError> {
    let p: Procedure = decode(path, read_json(path, SchemaKind::Procedure)?)?;
    p.check_against(inv).map_err(|e| PipelineError::invalid(path, e.to_string()))?;
    Ok(p)
}

fn load_constraints(path: &Path, draft: &Procedure) -> Result<ConstraintSet, PipelineError> {
    let c: ConstraintSet = decode(path, read_json(path, SchemaKind::Constraints)?)?;
    c.check(draft).map_err(|e| PipelineError::invalid(path, e.to_string()))?;
    Ok(c)
}

fn runtime(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Runtime(e.to_string())
}

fn stage_template(ctx: &mut Ctx) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let inv = load_inventory(&cfg.paths.inventory)?;
    for obj in objects(cfg, &inv)? {
        let tpl = build_template(&inv, &obj).map_err(runtime)?;
        let path = template_path(cfg, &obj);
        ctx.write(
            Stage::Template,
            &path,
            &to_json_bytes(&tpl),
            std::slice::from_ref(&cfg.paths.inventory),
            Some(SchemaKind::Template),
        )?;
    }
    Ok(())
}

fn stage_sample(ctx: &mut Ctx) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let inv = load_inventory(&cfg.paths.inventory)?;
    let stage_seed = derive_seed(cfg.seed, Stage::Sample.name());
    let oracle = match cfg.sampling.source {
        SampleSourceKind::Oracle => Some(decode::<OracleSpec>(
            &cfg.paths.oracle,
            read_json(&cfg.paths.oracle, SchemaKind::Oracle)?,
        )?),
        _ => None,
    };
    for obj in objects(cfg, &inv)? {
        let tpath = template_path(cfg, &obj);
        let tpl = load_template(&tpath)?;
        let out_path = samples_path(cfg, &obj);
        let mut inputs = vec![tpath.clone()];
        let samples = match cfg.sampling.source {
            SampleSourceKind::Oracle => {
                let spec = oracle.as_ref().expect("loaded above").project(&tpl);
                let noise = NoiseSpec {
                    reward_flip_rate: cfg.sampling.reward_flip_rate,
                    effect_corrupt_rate: cfg.sampling.effect_corrupt_rate,
                    seed: derive_seed(stage_seed, &obj),
                };
                inputs.push(cfg.paths.oracle.clone());
                simulate_oracle(&tpl, &spec, cfg.sampling.n, &noise)
                    .map_err(|e| match e {
                        SampleError::ActionMissing(_) | SampleError::InvalidOracle { .. } => {
                            PipelineError::invalid(&cfg.paths.oracle, e.to_string())
                        }
                        other => runtime(other),
                    })?
                    .samples
            }
            SampleSourceKind::File => {
                let input = cfg.paths.sample_input_dir.join(format!("{obj}.jsonl"));
                let bytes = read_bytes(&input)?;
                let out = ingest_samples(bytes.as_slice(), &tpl, SourceTag::File, ctx.strict)
                    .map_err(|e| PipelineError::invalid(&input, e.to_string()))?;
                let rej_path = cfg.paths.samples_dir.join(format!("{obj}.rejections.json"));
                if !out.rejections.is_empty() {
                    ctx.note(format!("{}: {} line(s) rejected", input.display(), out.rejections.len()));
                }
                ctx.write(Stage::Sample, &rej_path, &to_json_bytes(&out.rejections), std::slice::from_ref(&input), None)?;
                inputs.push(input);
                out.batch.samples
            }
            SampleSourceKind::Endpoint => {
                let ep = cfg.endpoint.as_ref().ok_or_else(|| {
                    PipelineError::Runtime("sampling.source = endpoint needs an [endpoint] section".into())
                })?;
                let prompt = build_prompt(&tpl, cfg.sampling.n);
                let prompt_path = cfg.paths.samples_dir.join(format!("{obj}.prompt.txt"));
                ctx.write(Stage::Sample, &prompt_path, prompt.as_bytes(), std::slice::from_ref(&tpath), None)?;
                let out = match fetch_samples(ep, &prompt, &tpl, ctx.strict) {
                    Ok(o) => o,
                    Err(SampleError::Unparseable { detail, raw }) => {
                        let raw_path = cfg.paths.samples_dir.join(format!("{obj}.raw.txt"));
                        ctx.write(Stage::Sample, &raw_path, raw.as_bytes(), &[], None)?;
                        return Err(runtime(format!("{obj}: unparseable endpoint response ({detail}); raw text kept in {}", raw_path.display())));
                    }
                    Err(e) => return Err(runtime(format!("{obj}: {e}"))),
                };
                let raw_path = cfg.paths.samples_dir.join(format!("{obj}.raw.txt"));
                ctx.write(Stage::Sample, &raw_path, out.raw.join("\n\n").as_bytes(), &[], None)?;
                let rej_path = cfg.paths.samples_dir.join(format!("{obj}.rejections.json"));
                let rej: Vec<_> = out.rejections.iter().map(|(_, r)| r.clone()).collect();
                ctx.write(Stage::Sample, &rej_path, &to_json_bytes(&rej), &[], None)?;
                out.batch.samples
            }
        };
        let mut buf = Vec::new();
        write_jsonl(&samples, &mut buf).map_err(|e| PipelineError::io(&out_path, e))?;
        ctx.write(Stage::Sample, &out_path, &buf, &inputs, None)?;
        ctx.note(format!("{obj}: {} samples", samples.len()));
    }
    Ok(())
}

fn stage_aggregate(ctx: &mut Ctx) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let inv = load_inventory(&cfg.paths.inventory)?;
    for obj in objects(cfg, &inv)? {
        let tpath = template_path(cfg, &obj);
        let tpl = load_template(&tpath)?;
        let spath = samples_path(cfg, &obj);
        let bytes = read_bytes(&spath)?;
        let out = ingest_samples(bytes.as_slice(), &tpl, SourceTag::File, ctx.strict)
            .map_err(|e| PipelineError::invalid(&spath, e.to_string()))?;
        if let Some(first) = out.rejections.first() {
            ctx.note(format!(
                "{}: {} line(s) rejected, first at line {}: {}",
                spath.display(),
                out.rejections.len(),
                first.line,
                first.reason
            ));
        }
        let wm = aggregate(&out.batch, &tpl);
        let path = world_model_path(cfg, &obj);
        let mut bytes = wm.to_json_pretty().into_bytes();
        bytes.push(b'\n');
        ctx.write(Stage::Aggregate, &path, &bytes, &[tpath, spath], Some(SchemaKind::WorldModel))?;
    }
    Ok(())
}

fn stage_extract(ctx: &mut Ctx) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let inv = load_inventory(&cfg.paths.inventory)?;
    let mut models = Vec::new();
    let mut inputs = vec![cfg.paths.inventory.clone()];
    for obj in objects(cfg, &inv)? {
        let path = world_model_path(cfg, &obj);
        let v = read_json(&path, SchemaKind::WorldModel)?;
        models.push(WorldModel::from_json_value(v).map_err(|m| PipelineError::invalid(&path, m))?);
        inputs.push(path);
    }
    let rules = extract_rules(&models, &inv, &cfg.extraction).map_err(runtime)?;
    ctx.note(format!(
        "{} preconditions, {} causal rules",
        rules.preconditions.len(),
        rules.causal_rules.len()
    ));
    ctx.write(Stage::Extract, &cfg.paths.rules, &to_json_bytes(&rules), &inputs, Some(SchemaKind::Rules))
}

fn stage_perturb(ctx: &mut Ctx) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let inv = load_inventory(&cfg.paths.inventory)?;
    let truth = load_procedure(&cfg.paths.truth, &inv)?;
    let spec = PerturbationSpec {
        n_misorderings: cfg.perturb.n_misorderings,
        kinds: cfg.perturb.kinds.clone(),
        seed: derive_seed(cfg.seed, Stage::Perturb.name()),
    };
    let (draft, log) = perturb(&truth, &spec, ctx.strict).map_err(|e| PipelineError::invalid(&cfg.paths.truth, e.to_string()))?;
    ctx.note(format!("{} moves, {} skipped", log.moves.len(), log.skipped.len()));
    let inputs = [cfg.paths.truth.clone()];
    ctx.write(Stage::Perturb, &cfg.paths.draft, &to_json_bytes(&draft), &inputs, Some(SchemaKind::Procedure))?;
    ctx.write(
        Stage::Perturb,
        &cfg.paths.perturbation_log,
        &to_json_bytes(&log),
        &inputs,
        Some(SchemaKind::Perturbation),
    )
}

fn stage_map(ctx: &mut Ctx) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let inv = load_inventory(&cfg.paths.inventory)?;
    let draft = load_procedure(&cfg.paths.draft, &inv)?;
    let rules: RuleSet = decode(&cfg.paths.rules, read_json(&cfg.paths.rules, SchemaKind::Rules)?)?;
    let mapped = map_rules_to_constraints(&draft, &rules.causal_rules)
        .map_err(|e| PipelineError::invalid(&cfg.paths.draft, e.to_string()))?;
    ctx.note(format!(
        "{} constraints, {} unmatched rules",
        mapped.constraints.len(),
        mapped.unmatched.len()
    ));
    let set = ConstraintSet {
        raw: mapped.constraints,
        cluster: Vec::new(),
        unmatched: mapped.unmatched,
    };
    ctx.write(
        Stage::Map,
        &cfg.paths.constraints,
        &to_json_bytes(&set),
        &[cfg.paths.draft.clone(), cfg.paths.rules.clone()],
        Some(SchemaKind::Constraints),
    )
}

fn stage_repair(ctx: &mut Ctx) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let inv = load_inventory(&cfg.paths.inventory)?;
    let draft = load_procedure(&cfg.paths.draft, &inv)?;
    let cs = load_constraints(&cfg.paths.constraints, &draft)?;
    let seed = derive_seed(cfg.seed, Stage::Repair.name());
    let result = repair(&draft, &cs.raw, &cs.cluster, &cfg.repair, &cfg.search, seed).map_err(runtime)?;
    ctx.note(format!(
        "draft cost {:.3} -> repaired cost {:.3}",
        result.draft_cost.total, result.cost.total
    ));
    ctx.write(
        Stage::Repair,
        &cfg.paths.repair,
        &to_json_bytes(&result),
        &[cfg.paths.draft.clone(), cfg.paths.constraints.clone()],
        Some(SchemaKind::RepairResult),
    )
}

fn stage_evaluate(ctx: &mut Ctx) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let inv = load_inventory(&cfg.paths.inventory)?;
    let truth = load_procedure(&cfg.paths.truth, &inv)?;
    let draft = load_procedure(&cfg.paths.draft, &inv)?;
    let cs = load_constraints(&cfg.paths.constraints, &draft)?;
    let result: RepairResult = decode(&cfg.paths.repair, read_json(&cfg.paths.repair, SchemaKind::RepairResult)?)?;
    let cmp = metrics::evaluate(&draft.ids(), &result.order, &truth.ids(), &cs.raw, cfg.repair.raw_penalty)
        .map_err(|e| PipelineError::invalid(&cfg.paths.repair, e.to_string()))?;
    let inputs = [
        cfg.paths.truth.clone(),
        cfg.paths.draft.clone(),
        cfg.paths.repair.clone(),
        cfg.paths.constraints.clone(),
    ];
    ctx.write(Stage::Evaluate, &cfg.paths.metrics, &to_json_bytes(&cmp), &inputs, Some(SchemaKind::Metrics))?;
    let table = cmp.to_table();
    ctx.note(table.clone());
    ctx.write(Stage::Evaluate, &cfg.paths.metrics.with_extension("txt"), table.as_bytes(), &inputs, None)
}

fn stage_tune(ctx: &mut Ctx) -> Result<(), PipelineError> {
    let cfg = ctx.cfg;
    let inv = load_inventory(&cfg.paths.inventory)?;
    let truth = load_procedure(&cfg.paths.truth, &inv)?;
    let draft = load_procedure(&cfg.paths.draft, &inv)?;
    let cs = load_constraints(&cfg.paths.constraints, &draft)?;
    let seed = derive_seed(cfg.seed, Stage::Tune.name());
    let rows = tune(&truth, &draft, &cs.raw, &cs.cluster, &cfg.tune, &cfg.search, seed)?;
    let inputs = [cfg.paths.truth.clone(), cfg.paths.draft.clone(), cfg.paths.constraints.clone()];
    ctx.write(Stage::Tune, &cfg.paths.tune, &to_json_bytes(&rows), &inputs, Some(SchemaKind::Tune))?;
    let table = format_ranking(&rows);
    ctx.note(table.clone());
    ctx.write(Stage::Tune, &cfg.paths.tune.with_extension("txt"), table.as_bytes(), &inputs, None)
}
