//! Trained model container and inference.
//!
//! File layout: magic `SDMB`, version `u16`, a length-prefixed JSON header
//! (config, metadata, graph hash, parameter names and shapes), then one
//! length-prefixed blob of little-endian `f64` values per parameter, and a
//! SHA-256 trailer.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::model::{ModelConfig, Params};
use super::train::{eval_log_probs, GraphContext};
use crate::codec::{ByteReader, ByteWriter};
use crate::epidemics::Snapshot;
use crate::error::{Error, Result};
use crate::estimators::SourceDistribution;
use crate::netgraph::Graph;

pub const BUNDLE_MAGIC: &[u8; 4] = b"SDMB";
pub const BUNDLE_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub final_train_loss: f64,
    pub final_val_loss: f64,
    /// Mean validation loss of the last five epochs before stopping.
    pub tail_val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub config: ModelConfig,
    pub params: Params,
    pub meta: TrainMeta,
    pub graph_id: String,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    meta: TrainMeta,
    graph_id: String,
    params: Vec<(String, [usize; 2])>,
}

impl ModelBundle {
    pub fn new(config: ModelConfig, params: Params, meta: TrainMeta, graph_id: String) -> Self {
        Self {
            config,
            params,
            meta,
            graph_id,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            config: self.config.clone(),
            meta: self.meta.clone(),
            graph_id: self.graph_id.clone(),
            params: self
                .params
                .names
                .iter()
                .zip(&self.params.values)
                .map(|(n, v)| (n.clone(), [v.nrows(), v.ncols()]))
                .collect(),
        };
        let mut w = ByteWriter::new();
        w.bytes(BUNDLE_MAGIC);
        w.u16(BUNDLE_VERSION);
        w.blob(&serde_json::to_vec(&header).expect("header serializes"));
        for v in &self.params.values {
            let mut buf = Vec::with_capacity(v.len() * 8);
            for x in v.iter() {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            w.blob(&buf);
        }
        w.finish()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = ByteReader::open(data, BUNDLE_MAGIC)?;
        let version = r.u16()?;
        if version != BUNDLE_VERSION {
            return Err(Error::Version {
                found: version,
                expected: BUNDLE_VERSION,
            });
        }
        let header: Header = serde_json::from_slice(r.blob()?).map_err(|e| Error::Corrupt(format!("bundle header: {e}")))?;
        header.config.validate()?;
        let expected: Vec<(String, (usize, usize))> = header.config.param_shapes();
        if expected.len() != header.params.len()
            || expected
                .iter()
                .zip(&header.params)
                .any(|((n, (r, c)), (hn, [hr, hc]))| n != hn || r != hr || c != hc)
        {
            return Err(Error::Corrupt("parameter list does not match the model config".into()));
        }
        let mut values = Vec::with_capacity(expected.len());
        for (_, (rows, cols)) in &expected {
            let blob = r.blob()?;
            if blob.len() != rows * cols * 8 {
                return Err(Error::Corrupt("parameter blob has the wrong length".into()));
            }
            let flat: Vec<f64> = blob.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            values.push(Array2::from_shape_vec((*rows, *cols), flat).expect("length checked"));
        }
        r.finish()?;
        Ok(Self {
            config: header.config,
            params: Params {
                names: expected.into_iter().map(|(n, _)| n).collect(),
                values,
            },
            meta: header.meta,
            graph_id: header.graph_id,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    fn check_graph(&self, g: &Graph) -> Result<()> {
        let h = g.content_hash();
        if h != self.graph_id {
            return Err(Error::HashMismatch {
                found: self.graph_id.clone(),
                expected: h,
            });
        }
        Ok(())
    }

    /// Unmasked model output for each snapshot: `exp(log_softmax)` over all nodes.
    pub fn predict_raw_batch(&self, g: &Graph, snapshots: &[&Snapshot]) -> Result<Vec<SourceDistribution>> {
        self.check_graph(g)?;
        if let Some(s) = snapshots.iter().find(|s| s.node_count() != g.node_count()) {
            return Err(Error::Shape(format!("snapshot has {} nodes, graph has {}", s.node_count(), g.node_count())));
        }
        let mut ctx = GraphContext::new(g, self.config.augmented());
        eval_log_probs(&self.config, &self.params, &mut ctx, snapshots, 128)?
            .into_iter()
            .map(|lp| SourceDistribution::from_weights(lp.into_iter().map(f64::exp).collect()))
            .collect()
    }

    /// Model output with susceptible nodes zeroed and the rest renormalized.
    pub fn predict_batch(&self, g: &Graph, snapshots: &[&Snapshot]) -> Result<Vec<SourceDistribution>> {
        self.predict_raw_batch(g, snapshots)?
            .into_iter()
            .zip(snapshots)
            .map(|(d, s)| {
                s.require_outbreak()?;
                d.mask_susceptible(s)
            })
            .collect()
    }

    pub fn predict(&self, g: &Graph, snapshot: &Snapshot) -> Result<SourceDistribution> {
        Ok(self.predict_batch(g, &[snapshot])?.remove(0))
    }

    pub fn predict_raw(&self, g: &Graph, snapshot: &Snapshot) -> Result<SourceDistribution> {
        Ok(self.predict_raw_batch(g, &[snapshot])?.remove(0))
    }
}

/// Masked prediction, see [`ModelBundle::predict`].
pub fn predict(bundle: &ModelBundle, g: &Graph, snapshot: &Snapshot) -> Result<SourceDistribution> {
    bundle.predict(g, snapshot)
}
