mod common;

use std::path::{Path, PathBuf};

use procforge::metrics::Comparison;
use procforge::pipeline::{
    manifest_path, run_stage, sha256_hex, Manifest, PipelineConfig, PipelineError, SampleSourceKind, Stage, TuneRow,
    WeightGrid,
};
use procforge::repair::{Procedure, RepairResult, RepairWeights};
use procforge::schema::{validate, SchemaKind};

fn setup() -> (tempfile::TempDir, PipelineConfig, Vec<u8>) {
    let dir = common::lab_workspace();
    let (cfg, bytes) = PipelineConfig::load(&dir.path().join("pipeline.toml")).unwrap();
    (dir, cfg, bytes)
}

fn run(stage: Stage, cfg: &PipelineConfig, bytes: &[u8]) -> Result<(), PipelineError> {
    run_stage(stage, cfg, bytes, false).map(|_| ())
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn files_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn full_run_artifacts_validate_and_carry_manifests() {
    let (_dir, cfg, bytes) = setup();
    let report = run_stage(Stage::All, &cfg, &bytes, false).unwrap();
    assert!(!report.artifacts.is_empty());
    let p = &cfg.paths;
    let mut checked = vec![
        (p.rules.clone(), SchemaKind::Rules),
        (p.draft.clone(), SchemaKind::Procedure),
        (p.perturbation_log.clone(), SchemaKind::Perturbation),
        (p.constraints.clone(), SchemaKind::Constraints),
        (p.repair.clone(), SchemaKind::RepairResult),
        (p.metrics.clone(), SchemaKind::Metrics),
    ];
    for f in files_in(&p.templates_dir).into_iter().filter(|f| !f.to_string_lossy().ends_with(".manifest.json")) {
        checked.push((f, SchemaKind::Template));
    }
    for f in files_in(&p.world_models_dir).into_iter().filter(|f| !f.to_string_lossy().ends_with(".manifest.json")) {
        checked.push((f, SchemaKind::WorldModel));
    }
    assert_eq!(checked.len(), 6 + 2 * 11);
    for (path, kind) in &checked {
        validate(*kind, &json(path)).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
    for f in files_in(&p.samples_dir).into_iter().filter(|f| f.extension().is_some_and(|e| e == "jsonl")) {
        for line in std::fs::read_to_string(&f).unwrap().lines() {
            validate(SchemaKind::Sample, &serde_json::from_str(line).unwrap()).unwrap();
        }
        checked.push((f, SchemaKind::Sample));
    }

    let config_sha = sha256_hex(&bytes);
    for (path, _) in &checked {
        let mpath = manifest_path(path);
        let mv = json(&mpath);
        validate(SchemaKind::Manifest, &mv).unwrap();
        let m: Manifest = serde_json::from_value(mv).unwrap();
        assert_eq!(m.output_sha256, sha256_hex(&std::fs::read(path).unwrap()), "{}", path.display());
        assert_eq!(m.config_sha256, config_sha);
        assert_eq!(m.seed, cfg.seed);
        assert!(!m.inputs.is_empty(), "{} lists no inputs", path.display());
        for i in &m.inputs {
            assert_eq!(i.sha256, sha256_hex(&std::fs::read(&i.path).unwrap()));
        }
    }
    let metrics = std::fs::read_to_string(p.metrics.with_extension("txt")).unwrap();
    assert!(metrics.contains("Draft") && metrics.contains("Repaired"));
}

#[test]
fn repair_improves_the_perturbed_draft() {
    let (_dir, cfg, bytes) = setup();
    run(Stage::All, &cfg, &bytes).unwrap();
    let c: Comparison = serde_json::from_value(json(&cfg.paths.metrics)).unwrap();
    assert!(c.draft.raw_slack > 0.0);
    assert!(c.repaired.raw_slack <= c.draft.raw_slack);
    assert!(c.repaired.kendall_tau >= c.draft.kendall_tau);
    let draft: Procedure = serde_json::from_value(json(&cfg.paths.draft)).unwrap();
    assert_ne!(draft.ids(), common::lab_truth().ids());
}

#[test]
fn position_only_weights_keep_the_draft() {
    let (_dir, mut cfg, bytes) = setup();
    cfg.repair = RepairWeights::new(1.0, 0.0, 0.0, 0.0);
    run(Stage::All, &cfg, &bytes).unwrap();
    let r: RepairResult = serde_json::from_value(json(&cfg.paths.repair)).unwrap();
    let draft: Procedure = serde_json::from_value(json(&cfg.paths.draft)).unwrap();
    assert_eq!(r.order, draft.ids());
}

#[test]
fn tune_ranks_the_grid() {
    let (_dir, mut cfg, bytes) = setup();
    run(Stage::All, &cfg, &bytes).unwrap();
    run(Stage::Tune, &cfg, &bytes).unwrap();
    let rows: Vec<TuneRow> = serde_json::from_value(json(&cfg.paths.tune)).unwrap();
    assert_eq!(rows.len(), 27);
    assert_eq!(rows[0].rank, 1);
    assert!(rows.windows(2).all(|w| w[0].rank <= w[1].rank));
    let default = RepairWeights::default();
    let row = rows.iter().find(|r| r.weights == default).expect("default weights in grid");
    assert_eq!(row.rank, 1);

    cfg.tune = WeightGrid {
        lambda_pos: vec![0.5],
        lambda_edge: vec![1.0],
        lambda_cluster: vec![0.0],
        lambda_raw: vec![2.0],
        ..WeightGrid::default()
    };
    run(Stage::Tune, &cfg, &bytes).unwrap();
    let rows: Vec<TuneRow> = serde_json::from_value(json(&cfg.paths.tune)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].rank, 1);
    let r: RepairResult = serde_json::from_value(json(&cfg.paths.repair)).unwrap();
    assert_eq!(rows[0].cost.total, r.cost.total);
}

#[test]
fn file_source_reproduces_oracle_world_models() {
    let (dir, mut cfg, bytes) = setup();
    cfg.sampling.objects = vec![common::PIPETTE.into(), "erlenmeyer_flask".into()];
    for s in [Stage::Template, Stage::Sample, Stage::Aggregate] {
        run(s, &cfg, &bytes).unwrap();
    }
    let wm_path = cfg.paths.world_models_dir.join(format!("{}.json", common::PIPETTE));
    let oracle_wm = std::fs::read(&wm_path).unwrap();

    let input = dir.path().join("samples_in");
    std::fs::create_dir_all(&input).unwrap();
    for obj in &cfg.sampling.objects {
        let mut text = std::fs::read_to_string(cfg.paths.samples_dir.join(format!("{obj}.jsonl"))).unwrap();
        text.push_str("{\"not\": \"a sample\"}\n\n");
        std::fs::write(input.join(format!("{obj}.jsonl")), text).unwrap();
    }
    cfg.sampling.source = SampleSourceKind::File;
    run(Stage::Sample, &cfg, &bytes).unwrap();
    run(Stage::Aggregate, &cfg, &bytes).unwrap();
    assert_eq!(std::fs::read(&wm_path).unwrap(), oracle_wm);
    let rej = json(&cfg.paths.samples_dir.join(format!("{}.rejections.json", common::PIPETTE)));
    assert_eq!(rej.as_array().unwrap().len(), 1);

    assert!(run_stage(Stage::Sample, &cfg, &bytes, true).is_err());
}

#[test]
fn missing_or_corrupt_inputs_are_invalid() {
    let (dir, cfg, bytes) = setup();
    // later stages without earlier outputs
    for s in [Stage::Sample, Stage::Aggregate, Stage::Extract, Stage::Map, Stage::Repair, Stage::Evaluate, Stage::Tune] {
        let err = run(s, &cfg, &bytes).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{s}: {err}");
    }
    run(Stage::All, &cfg, &bytes).unwrap();

    std::fs::write(&cfg.paths.rules, b"{ truncated").unwrap();
    assert_eq!(run(Stage::Map, &cfg, &bytes).unwrap_err().exit_code(), 1);
    std::fs::write(&cfg.paths.rules, b"{\"preconditions\": 3}").unwrap();
    assert_eq!(run(Stage::Map, &cfg, &bytes).unwrap_err().exit_code(), 1);

    let mut draft = json(&cfg.paths.draft);
    draft[0]["action"] = "centrifuge.spin".into();
    std::fs::write(&cfg.paths.draft, draft.to_string()).unwrap();
    assert_eq!(run(Stage::Repair, &cfg, &bytes).unwrap_err().exit_code(), 1);

    std::fs::remove_file(dir.path().join("inventory.json")).unwrap();
    assert_eq!(run(Stage::Template, &cfg, &bytes).unwrap_err().exit_code(), 1);
}

#[test]
fn unknown_focal_object_rejected() {
    let (_dir, mut cfg, bytes) = setup();
    cfg.sampling.objects = vec!["centrifuge".into()];
    assert_eq!(run(Stage::Template, &cfg, &bytes).unwrap_err().exit_code(), 1);
}

#[test]
fn endpoint_source_without_section_is_a_runtime_error() {
    let (_dir, mut cfg, bytes) = setup();
    cfg.sampling.objects = vec![common::PIPETTE.into()];
    run(Stage::Template, &cfg, &bytes).unwrap();
    cfg.sampling.source = SampleSourceKind::Endpoint;
    assert_eq!(run(Stage::Sample, &cfg, &bytes).unwrap_err().exit_code(), 2);
}

#[test]
fn config_errors_are_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let missing = PipelineConfig::load(&dir.path().join("nope.toml")).unwrap_err();
    assert_eq!(missing.exit_code(), 1);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seed = 1\n[repair]\nlambda_pos = -1.0\nlambda_edge = 1.0\nlambda_cluster = 0.0\nlambda_raw = 1.0\n").unwrap();
    assert_eq!(PipelineConfig::load(&bad).unwrap_err().exit_code(), 1);
    std::fs::write(&bad, "seed = 1\nunknown_key = 2\n").unwrap();
    assert_eq!(PipelineConfig::load(&bad).unwrap_err().exit_code(), 1);
}
