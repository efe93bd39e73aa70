#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use procforge::repair::Procedure;
use procforge::sample::{OracleAction, OracleSpec};
use procforge::template::build_all_templates;
use procforge::{parse_inventory, resolve_dynamic_domains, DomainInventory, MdpTemplate};

pub const PIPETTE: &str = "electronic_pipette";
pub const DRAW: &str = "transfer_material:ddh2o_bottle->electronic_pipette:ddH2O";
pub const POUR: &str = "transfer_material:electronic_pipette->erlenmeyer_flask:ddH2O";
pub const PIPETTE_POWER: &str = "electronic_pipette.power_button.set";

pub fn lab_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/lab")
}

pub fn lab_inventory() -> DomainInventory {
    let text = std::fs::read_to_string(lab_dir().join("inventory.json")).unwrap();
    resolve_dynamic_domains(&parse_inventory(&text).unwrap()).unwrap()
}

pub fn lab_oracle() -> OracleSpec {
    serde_json::from_str(&std::fs::read_to_string(lab_dir().join("oracle.json")).unwrap()).unwrap()
}

pub fn lab_truth() -> Procedure {
    serde_json::from_str(&std::fs::read_to_string(lab_dir().join("procedure_truth.json")).unwrap()).unwrap()
}

pub fn lab_templates(inv: &DomainInventory) -> Vec<MdpTemplate> {
    build_all_templates(inv).unwrap()
}

/// Copy the lab fixture inputs into a fresh directory.
pub fn lab_workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["inventory.json", "oracle.json", "procedure_truth.json", "pipeline.toml"] {
        std::fs::copy(lab_dir().join(f), dir.path().join(f)).unwrap();
    }
    dir
}

/// Random preconditions and effects (each variable with probability 1/3)
/// for every concrete action of `tpl`.
pub fn random_oracle(tpl: &MdpTemplate, seed: u64) -> OracleSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng| {
        let mut m = BTreeMap::new();
        for v in &tpl.variables {
            if rng.gen_ratio(1, 3) {
                m.insert(v.id.clone(), v.domain[rng.gen_range(0..v.domain.len())].clone());
            }
        }
        m
    };
    OracleSpec {
        actions: tpl
            .concrete_actions()
            .into_iter()
            .map(|a| OracleAction {
                action: a.id,
                params: a.params,
                preconditions: pick(&mut rng),
                effects: pick(&mut rng),
                suppress_invalid: false,
            })
            .collect(),
    }
}
