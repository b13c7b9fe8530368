//! Dense reverse-mode autodiff and the message-passing source detector
//! built on it: preprocessing layers, sum-aggregation message passing,
//! postprocessing layers, an optional input skip connection and a
//! per-graph log-softmax over nodes.

mod bundle;
mod gradcheck;
mod model;
mod tape;
mod train;
mod tune;

pub use bundle::{predict, ModelBundle, TrainMeta, BUNDLE_MAGIC, BUNDLE_VERSION};
pub use gradcheck::{gradient_check, relative_error};
pub use model::{batch_features, forward, is_trainable, Forward, Mode, ModelConfig, Params, AUGMENTED_FEATURES, STATE_FEATURES};
pub use tape::{Adjacency, BatchLayout, BnBatchStats, Segment, Tape, Var, BN_EPS};
pub use train::{adam_step, stratified_split, train, AdamState, EpochRecord, LearningCurve, TrainConfig, TrainOutcome};
pub use tune::{tune, SearchSpace, TrialLog, TuneResult};

use crate::epidemics::Snapshot;
use crate::error::Result;
use crate::estimators::{SourceDistribution, SourceEstimator};
use crate::netgraph::Graph;

/// A trained bundle bound to its graph, usable wherever an estimator is.
pub struct GnnEstimator<'g> {
    pub bundle: ModelBundle,
    pub graph: &'g Graph,
    pub label: String,
}

impl SourceEstimator for GnnEstimator<'_> {
    fn name(&self) -> &str {
        &self.label
    }

    fn estimate(&self, snapshot: &Snapshot, _: u64) -> Result<SourceDistribution> {
        self.bundle.predict(self.graph, snapshot)
    }

    fn estimate_batch(&self, snapshots: &[&Snapshot], _: &[u64]) -> Result<Vec<SourceDistribution>> {
        self.bundle.predict_batch(self.graph, snapshots)
    }
}
