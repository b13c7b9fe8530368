use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::epidemics::Snapshot;
use crate::error::{Error, Result};
use crate::netgraph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistributionKind {
    /// Non-negative values summing to one.
    Probabilistic,
    /// Arbitrary scores, higher means more likely; only the order matters.
    RankScores,
}

/// An estimator's output over all nodes of the graph.
///
/// Nodes are ranked by descending score. Ties go to the lower tie key,
/// which is the node index unless an explicit tie order was attached (the
/// random baseline uses a seeded permutation).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDistribution {
    kind: DistributionKind,
    scores: Vec<f64>,
    tie_order: Option<Vec<u32>>,
}

impl SourceDistribution {
    pub fn probabilistic(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Invalid("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() >= 1e-9 {
            return Err(Error::Invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self {
            kind: DistributionKind::Probabilistic,
            scores: probs,
            tie_order: None,
        })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Invalid(format!("cannot normalize weights with total {total}")));
        }
        for w in &mut weights {
            *w /= total;
        }
        Self::probabilistic(weights)
    }

    /// Softmax of log-weights restricted to `candidates`, computed with the
    /// log-sum-exp shift. Non-candidates get probability zero.
    pub fn from_log_weights(log_w: &[f64], candidates: &[usize]) -> Result<Self> {
        let m = candidates
            .iter()
            .map(|&v| log_w[v])
            .fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(Error::Invalid("no candidate with finite log-likelihood".into()));
        }
        let mut probs = vec![0.0; log_w.len()];
        let mut total = 0.0;
        for &v in candidates {
            let e = (log_w[v] - m).exp();
            probs[v] = e;
            total += e;
        }
        for p in &mut probs {
            *p /= total;
        }
        Self::probabilistic(probs)
    }

    pub fn rank_scores(scores: Vec<f64>) -> Self {
        Self {
            kind: DistributionKind::RankScores,
            scores,
            tie_order: None,
        }
    }

    /// Replaces the index tie-break with `order[v]` (lower wins).
    pub fn with_tie_order(mut self, order: Vec<u32>) -> Self {
        assert_eq!(order.len(), self.scores.len());
        self.tie_order = Some(order);
        self
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn is_probabilistic(&self) -> bool {
        self.kind == DistributionKind::Probabilistic
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Probabilities, or an error for rank-score outputs.
    pub fn probs(&self) -> Result<&[f64]> {
        if self.is_probabilistic() {
            Ok(&self.scores)
        } else {
            Err(Error::NotProbabilistic)
        }
    }

    #[inline]
    fn tie_key(&self, v: usize) -> u32 {
        self.tie_order.as_ref().map_or(v as u32, |o| o[v])
    }

    /// True when `a` ranks strictly ahead of `b`.
    #[inline]
    fn ahead(&self, a: usize, b: usize) -> bool {
        let (sa, sb) = (self.scores[a], self.scores[b]);
        sa > sb || (sa == sb && self.tie_key(a) < self.tie_key(b))
    }

    /// Node indices from most to least likely.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| {
            self.scores[b]
                .total_cmp(&self.scores[a])
                .then_with(|| self.tie_key(a).cmp(&self.tie_key(b)))
        });
        idx
    }

    /// 1-based rank of node `v`.
    pub fn rank_of(&self, v: usize) -> usize {
        1 + (0..self.scores.len()).filter(|&u| u != v && self.ahead(u, v)).count()
    }

    /// Top-ranked node.
    pub fn map_estimate(&self) -> usize {
        (1..self.scores.len()).fold(0, |best, v| if self.ahead(v, best) { v } else { best })
    }

    /// Zeroes susceptible nodes and renormalizes; rank-score outputs push
    /// susceptible nodes to negative infinity.
    pub fn mask_susceptible(&self, snapshot: &Snapshot) -> Result<Self> {
        let mut scores = self.scores.clone();
        match self.kind {
            DistributionKind::Probabilistic => {
                for (v, s) in scores.iter_mut().enumerate() {
                    if snapshot.state(v).is_susceptible() {
                        *s = 0.0;
                    }
                }
                let mut out = Self::from_weights(scores)?;
                out.tie_order = self.tie_order.clone();
                Ok(out)
            }
            DistributionKind::RankScores => {
                for (v, s) in scores.iter_mut().enumerate() {
                    if snapshot.state(v).is_susceptible() {
                        *s = f64::NEG_INFINITY;
                    }
                }
                Ok(Self {
                    kind: self.kind,
                    scores,
                    tie_order: self.tie_order.clone(),
                })
            }
        }
    }

    /// `{node_label: value}` keyed by external labels.
    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        let map: BTreeMap<String, f64> = self
            .scores
            .iter()
            .enumerate()
            .map(|(v, &s)| (g.label(v).to_string(), if s.is_finite() { s } else { f64::MIN }))
            .collect();
        serde_json::to_value(map).expect("finite map serializes")
    }
}
