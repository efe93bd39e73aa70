use serde::{Deserialize, Serialize};

use super::{ClusterConstraint, PrecedenceConstraint, Procedure, RepairError};

/// How a violated precedence constraint is charged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawPenalty {
    /// 1 per violated constraint.
    Binary,
    /// Slack `s` of `pos(succ) - pos(pred) + s >= 1`, i.e.
    /// `max(0, pos(pred) - pos(succ) + 1)`.
    #[default]
    Gap,
}

impl RawPenalty {
    pub fn charge(self, pred_pos: usize, succ_pos: usize) -> u64 {
        if succ_pos > pred_pos {
            return 0;
        }
        match self {
            RawPenalty::Binary => 1,
            RawPenalty::Gap => (pred_pos - succ_pos + 1) as u64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepairWeights {
    pub lambda_pos: f64,
    pub lambda_edge: f64,
    pub lambda_cluster: f64,
    pub lambda_raw: f64,
    #[serde(default)]
    pub raw_penalty: RawPenalty,
}

impl Default for RepairWeights {
    fn default() -> Self {
        Self::new(0.5, 1.0, 0.0, 2.0)
    }
}

impl RepairWeights {
    pub fn new(lambda_pos: f64, lambda_edge: f64, lambda_cluster: f64, lambda_raw: f64) -> Self {
        Self {
            lambda_pos,
            lambda_edge,
            lambda_cluster,
            lambda_raw,
            raw_penalty: RawPenalty::default(),
        }
    }

    pub fn with_penalty(mut self, raw_penalty: RawPenalty) -> Self {
        self.raw_penalty = raw_penalty;
        self
    }

    pub fn lambdas(&self) -> [f64; 4] {
        [self.lambda_pos, self.lambda_edge, self.lambda_cluster, self.lambda_raw]
    }

    pub fn validate(&self) -> Result<(), RepairError> {
        let l = self.lambdas();
        if l.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(RepairError::Weights(format!("weights must be finite and non-negative, got {l:?}")));
        }
        if l.iter().all(|x| *x == 0.0) {
            return Err(RepairError::Weights("at least one weight must be positive".into()));
        }
        Ok(())
    }
}

/// The four objective terms and their weighted sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBreakdown {
    /// Σ |new position − draft position|.
    pub position: u64,
    /// Draft adjacencies not preserved.
    pub edge: u64,
    /// Cross-cluster inversions.
    pub cluster: u64,
    /// Raw constraint penalty, per [`RawPenalty`].
    pub raw: u64,
    pub total: f64,
}

/// Draft, constraints and weights compiled to index form.
pub(crate) struct Problem {
    pub n: usize,
    raw: Vec<(usize, usize)>,
    clusters: Vec<(Vec<usize>, Vec<usize>)>,
    w: RepairWeights,
}

impl Problem {
    pub fn new(
        draft: &Procedure,
        constraints: &[PrecedenceConstraint],
        clusters: &[ClusterConstraint],
        w: &RepairWeights,
    ) -> Result<Self, RepairError> {
        draft.check_unique_ids()?;
        if draft.is_empty() {
            return Err(RepairError::EmptyProcedure);
        }
        w.validate()?;
        let idx = |id: &str| draft.position(id).ok_or_else(|| RepairError::UnknownStep(id.to_string()));
        let mut raw = Vec::with_capacity(constraints.len());
        for c in constraints {
            if c.predecessor == c.successor {
                return Err(RepairError::SelfConstraint(c.predecessor.clone()));
            }
            raw.push((idx(&c.predecessor)?, idx(&c.successor)?));
        }
        let members = |label: &str| -> Vec<usize> {
            (0..draft.len())
                .filter(|&i| draft.steps[i].cluster.as_deref() == Some(label))
                .collect()
        };
        let mut cl = Vec::with_capacity(clusters.len());
        for c in clusters {
            if c.earlier == c.later {
                return Err(RepairError::SelfCluster(c.earlier.clone()));
            }
            cl.push((members(&c.earlier), members(&c.later)));
        }
        Ok(Self {
            n: draft.len(),
            raw,
            clusters: cl,
            w: *w,
        })
    }

    /// Cost of `order`, where `order[p]` is the draft index placed at `p`.
    pub fn evaluate(&self, order: &[usize]) -> CostBreakdown {
        let mut pos = vec![0usize; self.n];
        for (p, &i) in order.iter().enumerate() {
            pos[i] = p;
        }
        let position: u64 = pos.iter().enumerate().map(|(i, &p)| i.abs_diff(p) as u64).sum();
        let edge = (0..self.n.saturating_sub(1)).filter(|&i| pos[i + 1] != pos[i] + 1).count() as u64;
        let raw: u64 = self
            .raw
            .iter()
            .map(|&(a, b)| self.w.raw_penalty.charge(pos[a], pos[b]))
            .sum();
        let cluster: u64 = self
            .clusters
            .iter()
            .map(|(early, late)| {
                early
                    .iter()
                    .map(|&u| late.iter().filter(|&&v| pos[v] < pos[u]).count() as u64)
                    .sum::<u64>()
            })
            .sum();
        let w = &self.w;
        let total = w.lambda_pos * position as f64
            + w.lambda_edge * edge as f64
            + w.lambda_cluster * cluster as f64
            + w.lambda_raw * raw as f64;
        CostBreakdown {
            position,
            edge,
            cluster,
            raw,
            total,
        }
    }
}

/// Translate an id order into draft indices, rejecting non-bijections.
pub(crate) fn order_indices(order: &[String], draft: &Procedure) -> Result<Vec<usize>, RepairError> {
    if order.len() != draft.len() {
        return Err(RepairError::NotBijective(format!(
            "{} ids for {} steps",
            order.len(),
            draft.len()
        )));
    }
    let mut seen = vec![false; draft.len()];
    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let i = draft
            .position(id)
            .ok_or_else(|| RepairError::NotBijective(format!("unknown step `{id}`")))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(RepairError::NotBijective(format!("step `{id}` repeated")));
        }
        out.push(i);
    }
    Ok(out)
}

/// Evaluate the repair objective for an ordering of the draft's step ids.
pub fn objective_cost(
    order: &[String],
    draft: &Procedure,
    constraints: &[PrecedenceConstraint],
    clusters: &[ClusterConstraint],
    w: &RepairWeights,
) -> Result<CostBreakdown, RepairError> {
    let problem = Problem::new(draft, constraints, clusters, w)?;
    Ok(problem.evaluate(&order_indices(order, draft)?))
}
