//! Factorized likelihood from Monte-Carlo node-state marginals.
//!
//! The table file uses the shared binary framing: magic `SDPT`, version
//! `u16`, graph hash (32 bytes), node count `u32`, runs per source `u32`,
//! then `N*N*3` probabilities as `f64` ordered by source, node, state,
//! closed by a SHA-256 trailer.

use rayon::prelude::*;

use super::SourceDistribution;
use crate::codec::{ByteReader, ByteWriter};
use crate::epidemics::{NodeState, SimDataset, Snapshot};
use crate::error::{Error, Result};
use crate::netgraph::Graph;

pub const TABLE_MAGIC: &[u8; 4] = b"SDPT";
pub const TABLE_VERSION: u16 = 1;

/// `p[q][v][state]`, add-one smoothed. The source itself is never susceptible.
#[derive(Debug, Clone, PartialEq)]
pub struct StateProbTable {
    graph_id: String,
    node_count: usize,
    n_per_source: usize,
    probs: Vec<[f64; 3]>,
}

impl StateProbTable {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn n_per_source(&self) -> usize {
        self.n_per_source
    }

    pub fn graph_id(&self) -> &str {
        &self.graph_id
    }

    #[inline]
    pub fn prob(&self, q: usize, v: usize, s: NodeState) -> f64 {
        self.probs[q * self.node_count + v][s.index()]
    }

    /// Log-likelihood of the snapshot for every source.
    pub fn log_likelihoods(&self, snapshot: &Snapshot) -> Result<Vec<f64>> {
        if snapshot.node_count() != self.node_count {
            return Err(Error::Shape(format!(
                "snapshot has {} nodes, table has {}",
                snapshot.node_count(),
                self.node_count
            )));
        }
        let n = self.node_count;
        Ok((0..n)
            .map(|q| {
                let row = &self.probs[q * n..(q + 1) * n];
                row.iter().zip(&snapshot.states).map(|(p, s)| p[s.index()].ln()).sum()
            })
            .collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.bytes(TABLE_MAGIC);
        w.u16(TABLE_VERSION);
        w.bytes(&hex::decode(&self.graph_id).unwrap_or_else(|_| vec![0; 32]));
        w.u32(self.node_count as u32);
        w.u32(self.n_per_source as u32);
        for p in &self.probs {
            for &x in p {
                w.f64(x);
            }
        }
        w.finish()
    }

    pub fn from_bytes(data: &[u8], graph: Option<&Graph>) -> Result<Self> {
        let mut r = ByteReader::open(data, TABLE_MAGIC)?;
        let version = r.u16()?;
        if version != TABLE_VERSION {
            return Err(Error::Version {
                found: version,
                expected: TABLE_VERSION,
            });
        }
        let graph_id = hex::encode(r.take(32)?);
        if let Some(g) = graph {
            let expected = g.content_hash();
            if expected != graph_id {
                return Err(Error::HashMismatch { found: graph_id, expected });
            }
        }
        let node_count = r.u32()? as usize;
        let n_per_source = r.u32()? as usize;
        let cells = node_count
            .checked_mul(node_count)
            .filter(|c| c * 24 <= data.len())
            .ok_or_else(|| Error::Corrupt("table size does not match file length".into()))?;
        let mut probs = Vec::with_capacity(cells);
        for _ in 0..cells {
            probs.push([r.f64()?, r.f64()?, r.f64()?]);
        }
        r.finish()?;
        Ok(Self {
            graph_id,
            node_count,
            n_per_source,
            probs,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>, graph: Option<&Graph>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?, graph)
    }
}

/// Node-state frequencies per source with add-one smoothing: `(c+1)/(n+3)`
/// off the source, `(c+1)/(n+2)` over I and R at the source.
pub fn mcmf_state_probs(dataset: &SimDataset) -> Result<StateProbTable> {
    if !dataset.is_balanced() || dataset.n_per_source == 0 {
        return Err(Error::Invalid("MCMF needs a balanced dataset with n > 0".into()));
    }
    let n = dataset.node_count;
    let runs = dataset.n_per_source as f64;
    let rows: Vec<Vec<[f64; 3]>> = (0..n)
        .into_par_iter()
        .map(|q| {
            let mut counts = vec![[0u32; 3]; n];
            for r in dataset.records_for(q) {
                for (c, s) in counts.iter_mut().zip(&r.snapshot.states) {
                    c[s.index()] += 1;
                }
            }
            counts
                .iter()
                .enumerate()
                .map(|(v, c)| {
                    if v == q {
                        let d = runs + 2.0;
                        [0.0, (c[1] as f64 + 1.0) / d, (c[2] as f64 + 1.0) / d]
                    } else {
                        let d = runs + 3.0;
                        [(c[0] as f64 + 1.0) / d, (c[1] as f64 + 1.0) / d, (c[2] as f64 + 1.0) / d]
                    }
                })
                .collect()
        })
        .collect();
    Ok(StateProbTable {
        graph_id: dataset.graph_id.clone(),
        node_count: n,
        n_per_source: dataset.n_per_source,
        probs: rows.into_iter().flatten().collect(),
    })
}

/// Posterior over the snapshot's non-susceptible nodes under a uniform prior.
pub fn mcmf_posterior(snapshot: &Snapshot, table: &StateProbTable) -> Result<SourceDistribution> {
    snapshot.require_outbreak()?;
    let log_l = table.log_likelihoods(snapshot)?;
    SourceDistribution::from_log_weights(&log_l, &snapshot.non_susceptible())
}
