//! Benchmark source detectors: Random, Jordan center, Betweenness, the soft
//! margin estimator and the Monte-Carlo mean-field likelihood.

mod distribution;
mod heuristics;
mod mcmf;
mod sme;

pub use distribution::{DistributionKind, SourceDistribution};
pub use heuristics::{betweenness_estimator, jordan_estimator, random_estimator};
pub use mcmf::{mcmf_posterior, mcmf_state_probs, StateProbTable, TABLE_MAGIC, TABLE_VERSION};
pub use sme::{jaccard_similarity, sme_likelihoods, sme_select_a, SmeConfig, SmeIndex};

use crate::epidemics::Snapshot;
use crate::error::Result;
use crate::netgraph::Graph;

/// Anything that maps a snapshot to a distribution over candidate sources.
/// `case_seed` feeds estimators with internal randomness.
pub trait SourceEstimator: Sync {
    fn name(&self) -> &str;
    fn estimate(&self, snapshot: &Snapshot, case_seed: u64) -> Result<SourceDistribution>;

    /// Several snapshots at once; estimators with a batched path override this.
    fn estimate_batch(&self, snapshots: &[&Snapshot], case_seeds: &[u64]) -> Result<Vec<SourceDistribution>> {
        snapshots.iter().zip(case_seeds).map(|(s, &k)| self.estimate(s, k)).collect()
    }
}

pub struct RandomEstimator;

impl SourceEstimator for RandomEstimator {
    fn name(&self) -> &str {
        "Random"
    }

    fn estimate(&self, snapshot: &Snapshot, case_seed: u64) -> Result<SourceDistribution> {
        random_estimator(snapshot, case_seed)
    }
}

pub struct JordanEstimator<'g>(pub &'g Graph);

impl SourceEstimator for JordanEstimator<'_> {
    fn name(&self) -> &str {
        "Jordan"
    }

    fn estimate(&self, snapshot: &Snapshot, _: u64) -> Result<SourceDistribution> {
        jordan_estimator(self.0, snapshot)
    }
}

pub struct BetweennessEstimator<'g>(pub &'g Graph);

impl SourceEstimator for BetweennessEstimator<'_> {
    fn name(&self) -> &str {
        "Betweenness"
    }

    fn estimate(&self, snapshot: &Snapshot, _: u64) -> Result<SourceDistribution> {
        betweenness_estimator(self.0, snapshot)
    }
}

pub struct SmeEstimator {
    pub index: SmeIndex,
    pub config: SmeConfig,
}

impl SourceEstimator for SmeEstimator {
    fn name(&self) -> &str {
        "SME"
    }

    fn estimate(&self, snapshot: &Snapshot, case_seed: u64) -> Result<SourceDistribution> {
        self.index.posterior(snapshot, &self.config, case_seed)
    }
}

pub struct McmfEstimator(pub StateProbTable);

impl SourceEstimator for McmfEstimator {
    fn name(&self) -> &str {
        "MCMF"
    }

    fn estimate(&self, snapshot: &Snapshot, _: u64) -> Result<SourceDistribution> {
        mcmf_posterior(snapshot, &self.0)
    }
}
