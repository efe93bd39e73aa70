//! Seeded misordering of a procedure, used to build drafts from a ground
//! truth. Step roles are recognised from action ids:
//!
//! - transfer: `transfer_material:<source>-><target>[:material]`
//! - open / close: component actions ending in `.open` / `.close`
//! - power on / off: an action whose id mentions `power`, with `value=on|off`
//! - reset: a non-power action of the same object carrying a `value` param

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::repair::{Procedure, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbKind {
    EarlyTransferBeforeOpen,
    EarlyClose,
    LatePowerOn,
    EarlyPowerOffBeforeReset,
    GenericAdjacentSwap,
    GenericReinsert,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub n_misorderings: usize,
    pub kinds: Vec<PerturbKind>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PerturbError {
    #[error("n_misorderings must be at least 1")]
    ZeroMisorderings,
    #[error("no perturbation kinds given")]
    NoKinds,
    #[error("procedure needs at least 2 steps")]
    TooShort,
    #[error("perturbation `{kind:?}` is not applicable: {reason}")]
    Inapplicable { kind: PerturbKind, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbMove {
    pub kind: PerturbKind,
    pub step: String,
    /// Position before and after the move, in the sequence at that time.
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkippedPerturbation {
    pub kind: PerturbKind,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationLog {
    pub seed: u64,
    pub moves: Vec<PerturbMove>,
    pub skipped: Vec<SkippedPerturbation>,
}

/// Objects named by an action id: the owner for control actions, both
/// endpoints for interaction actions.
fn objects_of(action: &str) -> Vec<&str> {
    fn obj(r: &str) -> &str {
        r.split('.').next().unwrap_or(r)
    }
    if let Some((_, rest)) = action.split_once(':') {
        let (src, rest) = rest.split_once("->").unwrap_or((rest, ""));
        let tgt = rest.split(':').next().unwrap_or(rest);
        vec![obj(src), obj(tgt)]
    } else {
        vec![obj(action)]
    }
}

fn owner(step: &Step) -> &str {
    objects_of(&step.action)[0]
}

fn is_transfer_from(step: &Step, object: &str) -> bool {
    step.action.starts_with("transfer_material:") && owner(step) == object
}

fn is_open(step: &Step) -> bool {
    step.action.ends_with(".open")
}

fn is_close(step: &Step) -> bool {
    step.action.ends_with(".close")
}

fn is_power(step: &Step, value: &str) -> bool {
    step.action.contains("power") && step.params.get("value").map(String::as_str) == Some(value)
}

fn is_reset_for(step: &Step, object: &str) -> bool {
    !step.action.contains("power") && step.params.contains_key("value") && owner(step) == object
}

fn touches(step: &Step, object: &str) -> bool {
    objects_of(&step.action).contains(&object)
}

/// A candidate move: step index, target index in the sequence with that
/// step removed, and an optional anchor step.
type Candidate = (usize, usize, Option<usize>);

fn candidates(kind: PerturbKind, steps: &[Step], moved: &[String], rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    let n = steps.len();
    let free = |i: usize| !moved.contains(&steps[i].id);
    let mut out = Vec::new();
    match kind {
        PerturbKind::EarlyTransferBeforeOpen => {
            for t in (0..n).filter(|&t| free(t)) {
                let obj = owner(&steps[t]);
                if !steps[t].action.starts_with("transfer_material:") {
                    continue;
                }
                if let Some(o) = (0..t).rev().find(|&o| is_open(&steps[o]) && owner(&steps[o]) == obj) {
                    debug_assert!(is_transfer_from(&steps[t], obj));
                    let r = rng.gen_range(1..=2usize);
                    out.push((t, o.saturating_sub(r), Some(o)));
                }
            }
        }
        PerturbKind::EarlyClose => {
            for c in (0..n).filter(|&c| free(c) && is_close(&steps[c])) {
                let obj = owner(&steps[c]);
                if let Some(o) = (0..c).rev().find(|&o| is_open(&steps[o]) && owner(&steps[o]) == obj) {
                    let r = rng.gen_range(0..=1usize);
                    out.push((c, o.saturating_sub(r), Some(o)));
                }
            }
        }
        PerturbKind::LatePowerOn => {
            for p in (0..n).filter(|&p| free(p) && is_power(&steps[p], "on")) {
                let obj = owner(&steps[p]);
                if let Some(u) = (p + 1..n).find(|&u| touches(&steps[u], obj)) {
                    let r = rng.gen_range(1..=2usize);
                    // index in the sequence with p removed, so "after u" is u
                    out.push((p, (u + r - 1).min(n - 1), Some(u)));
                }
            }
        }
        PerturbKind::EarlyPowerOffBeforeReset => {
            for q in (0..n).filter(|&q| free(q) && is_power(&steps[q], "off")) {
                let obj = owner(&steps[q]);
                if let Some(z) = (0..q).rev().find(|&z| is_reset_for(&steps[z], obj)) {
                    let r = rng.gen_range(1..=2usize);
                    out.push((q, z.saturating_sub(r), Some(z)));
                }
            }
        }
        PerturbKind::GenericAdjacentSwap => {
            for i in (0..n.saturating_sub(1)).filter(|&i| free(i) && free(i + 1)) {
                out.push((i, i + 1, None));
            }
        }
        PerturbKind::GenericReinsert => {
            for i in (0..n).filter(|&i| free(i)) {
                let offset = rng.gen_range(2..=3usize);
                let to = if rng.gen_bool(0.5) {
                    i.saturating_sub(offset)
                } else {
                    (i + offset).min(n - 1)
                };
                if to != i {
                    out.push((i, to, None));
                }
            }
        }
    }
    out
}

/// Apply `n_misorderings` moves, cycling through `kinds` in order. Each move
/// only reorders; no step is ever added or removed, and a step is moved at
/// most once. Inapplicable kinds are logged and skipped, or rejected when
/// `strict`.
pub fn perturb(truth: &Procedure, spec: &PerturbationSpec, strict: bool) -> Result<(Procedure, PerturbationLog), PerturbError> {
    if spec.n_misorderings == 0 {
        return Err(PerturbError::ZeroMisorderings);
    }
    if spec.kinds.is_empty() {
        return Err(PerturbError::NoKinds);
    }
    if truth.len() < 2 {
        return Err(PerturbError::TooShort);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut steps = truth.steps.clone();
    let mut moved: Vec<String> = Vec::new();
    let mut log = PerturbationLog {
        seed: spec.seed,
        ..Default::default()
    };
    for i in 0..spec.n_misorderings {
        let kind = spec.kinds[i % spec.kinds.len()];
        let cands = candidates(kind, &steps, &moved, &mut rng);
        let Some(&(from, to, anchor)) = cands.choose(&mut rng) else {
            let reason = "no matching step left to move".to_string();
            if strict {
                return Err(PerturbError::Inapplicable { kind, reason });
            }
            log::warn!("perturbation {kind:?} skipped: {reason}");
            log.skipped.push(SkippedPerturbation { kind, reason });
            continue;
        };
        let anchor_id = anchor.map(|a| steps[a].id.clone());
        let step = steps.remove(from);
        steps.insert(to, step.clone());
        if kind == PerturbKind::GenericAdjacentSwap {
            moved.push(steps[from].id.clone());
        }
        moved.push(step.id.clone());
        log.moves.push(PerturbMove {
            kind,
            step: step.id,
            from,
            to,
            anchor: anchor_id,
        });
    }
    Ok((Procedure::new(steps), log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::ActionRef;

    fn steps(actions: &[&str]) -> Procedure {
        Procedure::new(
            actions
                .iter()
                .enumerate()
                .map(|(i, a)| Step::new(format!("s{i}"), ActionRef::new(*a), ""))
                .collect(),
        )
    }

    fn spec(kinds: Vec<PerturbKind>, n: usize) -> PerturbationSpec {
        PerturbationSpec {
            n_misorderings: n,
            kinds,
            seed: 3,
        }
    }

    #[test]
    fn adjacent_swap_on_two_steps() {
        let (p, log) = perturb(&steps(&["a.x", "b.y"]), &spec(vec![PerturbKind::GenericAdjacentSwap], 1), false).unwrap();
        assert_eq!(p.ids(), vec!["s1", "s0"]);
        assert_eq!(log.moves.len(), 1);
    }

    #[test]
    fn zero_misorderings_rejected() {
        assert_eq!(
            perturb(&steps(&["a.x", "b.y"]), &spec(vec![PerturbKind::GenericAdjacentSwap], 0), false).unwrap_err(),
            PerturbError::ZeroMisorderings
        );
    }

    #[test]
    fn transfer_moves_before_open() {
        let p = steps(&["z.q", "b.cap.open", "transfer_material:b->c:m", "b.cap.close"]);
        let (d, log) = perturb(&p, &spec(vec![PerturbKind::EarlyTransferBeforeOpen], 1), true).unwrap();
        let pos = |id: &str| d.position(id).unwrap();
        assert!(pos("s2") < pos("s1"));
        assert_eq!(log.moves[0].anchor.as_deref(), Some("s1"));
    }

    #[test]
    fn inapplicable_kind_skipped_or_rejected() {
        let p = steps(&["a.x", "b.y"]);
        let s = spec(vec![PerturbKind::EarlyPowerOffBeforeReset], 1);
        let (d, log) = perturb(&p, &s, false).unwrap();
        assert_eq!(d, p);
        assert_eq!(log.skipped.len(), 1);
        assert!(perturb(&p, &s, true).is_err());
    }

    #[test]
    fn only_reorders() {
        let p = steps(&["a.x", "b.y", "c.z", "d.w", "e.v", "f.u"]);
        let s = spec(vec![PerturbKind::GenericReinsert, PerturbKind::GenericAdjacentSwap], 4);
        let (d, _) = perturb(&p, &s, false).unwrap();
        let mut a = d.ids();
        a.sort();
        let mut b = p.ids();
        b.sort();
        assert_eq!(a, b);
    }
}
