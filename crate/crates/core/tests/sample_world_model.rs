mod common;

use proptest::prelude::*;
use procforge::sample::{ingest_samples, simulate_oracle, write_jsonl, NoiseSpec, SampleBatch, SourceTag};
use procforge::world_model::{aggregate, WorldModel};
use procforge::MdpTemplate;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn templates() -> Vec<MdpTemplate> {
    common::lab_templates(&common::lab_inventory())
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn noiseless_oracle_rewards_follow_preconditions(t in 0usize..11, seed in any::<u64>(), n in 1usize..300) {
        let tpls = templates();
        let tpl = &tpls[t];
        let oracle = common::random_oracle(tpl, seed);
        let batch = simulate_oracle(tpl, &oracle, n, &NoiseSpec::noiseless(seed)).unwrap();
        prop_assert_eq!(batch.len(), n);
        for s in &batch.samples {
            s.check(tpl).unwrap();
            let entry = oracle.entry(&s.action_ref()).unwrap();
            let holds = entry.preconditions.iter().all(|(k, v)| s.state.get(k) == Some(v.as_str()));
            prop_assert_eq!(s.reward == 1, holds);
            if s.reward == 0 {
                prop_assert_eq!(&s.next_state, &s.state);
            } else {
                let mut want = s.state.clone();
                for (k, v) in &entry.effects {
                    want.set(k.clone(), v.clone());
                }
                prop_assert_eq!(&s.next_state, &want);
            }
        }
    }

    #[test]
    fn simulation_is_reproducible(t in 0usize..11, seed in any::<u64>(), flip in 0.0f64..0.5, corrupt in 0.0f64..0.5) {
        let tpls = templates();
        let tpl = &tpls[t];
        let oracle = common::random_oracle(tpl, seed);
        let noise = NoiseSpec { reward_flip_rate: flip, effect_corrupt_rate: corrupt, seed };
        let a = simulate_oracle(tpl, &oracle, 120, &noise).unwrap();
        let b = simulate_oracle(tpl, &oracle, 120, &noise).unwrap();
        prop_assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn ingest_never_accepts_invalid_samples(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let tpls = templates();
        let tpl = &tpls[2];
        let out = ingest_samples(bytes.as_slice(), tpl, SourceTag::File, false).unwrap();
        for s in &out.batch.samples {
            prop_assert!(s.check(tpl).is_ok());
            prop_assert!(s.reward <= 1);
        }
    }

    #[test]
    fn ingest_mutated_lines(seed in any::<u64>(), cut in 0usize..200, byte in any::<u8>()) {
        let tpls = templates();
        let tpl = &tpls[2];
        let batch = simulate_oracle(tpl, &common::random_oracle(tpl, seed), 8, &NoiseSpec::noiseless(seed)).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&batch.samples, &mut buf).unwrap();
        let i = cut % buf.len();
        buf[i] = byte;
        let out = ingest_samples(buf.as_slice(), tpl, SourceTag::File, false).unwrap();
        prop_assert!(out.batch.len() + out.rejections.len() <= 8 + 1);
        for s in &out.batch.samples {
            prop_assert!(s.check(tpl).is_ok());
        }
    }

    #[test]
    fn aggregation_commutes_with_merge(t in 0usize..11, seed in any::<u64>(), n in 1usize..200, split in 0usize..200, flip in 0.0f64..0.4) {
        let tpls = templates();
        let tpl = &tpls[t];
        let noise = NoiseSpec { reward_flip_rate: flip, effect_corrupt_rate: flip / 2.0, seed };
        let batch = simulate_oracle(tpl, &common::random_oracle(tpl, seed), n, &noise).unwrap();
        let cut = split % (n + 1);
        let part = |range: std::ops::Range<usize>| {
            let mut b = SampleBatch::empty(tpl, SourceTag::Oracle);
            b.samples = batch.samples[range].to_vec();
            aggregate(&b, tpl)
        };
        let (a, b) = (part(0..cut), part(cut..n));
        let whole = aggregate(&batch, tpl);
        prop_assert_eq!(a.merge(&b).unwrap(), whole.clone());
        prop_assert_eq!(b.merge(&a).unwrap(), whole.clone());
        let c = part(cut / 2..cut);
        let a1 = part(0..cut / 2);
        prop_assert_eq!(a1.merge(&c).unwrap().merge(&b).unwrap(), a1.merge(&c.merge(&b).unwrap()).unwrap());
        prop_assert_eq!(whole.sample_count(), n as u64);
        let total: u64 = whole.entries.values().map(|e| e.total_count()).sum();
        prop_assert_eq!(total, n as u64);
        for e in whole.entries.values() {
            let weighted: f64 = e.outcomes.iter().map(|o| e.probability(o) * o.avg_reward()).sum();
            prop_assert!((weighted - e.plausibility()).abs() < 1e-9);
        }
    }
}

#[test]
fn world_model_file_roundtrip_and_schema() {
    let tpls = templates();
    let tpl = &tpls[2];
    let batch = simulate_oracle(tpl, &common::random_oracle(tpl, 5), 200, &NoiseSpec::noiseless(5)).unwrap();
    let wm = aggregate(&batch, tpl);
    let v: serde_json::Value = serde_json::from_str(&wm.to_json_pretty()).unwrap();
    procforge::schema::validate(procforge::schema::SchemaKind::WorldModel, &v).unwrap();
    assert_eq!(WorldModel::from_json_value(v).unwrap(), wm);
}

#[test]
fn merge_rejects_other_template() {
    let tpls = templates();
    assert!(WorldModel::empty(&tpls[0]).merge(&WorldModel::empty(&tpls[1])).is_err());
}

#[test]
fn sample_lines_match_schema() {
    let tpls = templates();
    let tpl = &tpls[2];
    let batch = simulate_oracle(tpl, &common::random_oracle(tpl, 9), 40, &NoiseSpec::noiseless(9)).unwrap();
    for s in &batch.samples {
        let v = serde_json::to_value(s).unwrap();
        procforge::schema::validate(procforge::schema::SchemaKind::Sample, &v).unwrap();
    }
}

#[test]
fn suppressed_actions_only_yield_successes() {
    let inv = common::lab_inventory();
    let tpl = procforge::build_template(&inv, common::PIPETTE).unwrap();
    let oracle = common::lab_oracle().project(&tpl);
    let batch = simulate_oracle(&tpl, &oracle, 250, &NoiseSpec::noiseless(1)).unwrap();
    let power: Vec<_> = batch.samples.iter().filter(|s| s.action == common::PIPETTE_POWER).collect();
    assert!(!power.is_empty());
    assert!(power.iter().all(|s| s.reward == 1));
    assert!(batch.samples.iter().any(|s| s.action == common::DRAW && s.reward == 0));
}
