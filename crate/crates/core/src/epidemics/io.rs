//! Binary dataset container.
//!
//! Layout (little endian): magic `SDDS`, version `u16`, graph hash (32 raw
//! bytes), node count `u32`, beta `f64`, mu `f64`, duration tag `u8`
//! (0 fixed, 1 uniform) and value `f64`, replicates per source `u32`,
//! master seed `u64`, record count `u64`, then per record: source `u32`,
//! duration `f64`, seed `u64`, node states packed four per byte (two bits
//! each, node `v` at bits `2*(v%4)` of byte `v/4`). A SHA-256 of all
//! preceding bytes closes the file.

use super::{DurationSpec, EpidemicParams, NodeState, OutbreakRecord, SimDataset, Snapshot};
use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::netgraph::Graph;

pub const DATASET_MAGIC: &[u8; 4] = b"SDDS";
pub const DATASET_VERSION: u16 = 1;

pub(crate) fn pack_states(states: &[NodeState], out: &mut Vec<u8>) {
    for chunk in states.chunks(4) {
        let mut byte = 0u8;
        for (k, s) in chunk.iter().enumerate() {
            byte |= (*s as u8) << (2 * k);
        }
        out.push(byte);
    }
}

pub(crate) fn unpack_states(bytes: &[u8], n: usize) -> Result<Vec<NodeState>> {
    (0..n)
        .map(|v| {
            let code = (bytes[v / 4] >> (2 * (v % 4))) & 0b11;
            NodeState::from_code(code).ok_or_else(|| Error::Corrupt(format!("invalid state code {code}")))
        })
        .collect()
}

impl SimDataset {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.bytes(DATASET_MAGIC);
        w.u16(DATASET_VERSION);
        w.bytes(&hex::decode(&self.graph_id).unwrap_or_else(|_| vec![0; 32]));
        w.u32(self.node_count as u32);
        w.f64(self.params.beta);
        w.f64(self.params.mu);
        match self.duration {
            DurationSpec::Fixed(t) => {
                w.u8(0);
                w.f64(t);
            }
            DurationSpec::UniformUpTo(t) => {
                w.u8(1);
                w.f64(t);
            }
        }
        w.u32(self.n_per_source as u32);
        w.u64(self.master_seed);
        w.u64(self.records.len() as u64);
        let mut packed = Vec::with_capacity(self.node_count.div_ceil(4));
        for r in &self.records {
            w.u32(r.source as u32);
            w.f64(r.snapshot.time);
            w.u64(r.seed);
            packed.clear();
            pack_states(&r.snapshot.states, &mut packed);
            w.bytes(&packed);
        }
        w.finish()
    }

    /// Decodes a dataset; when `graph` is given its content hash must match.
    pub fn from_bytes(data: &[u8], graph: Option<&Graph>) -> Result<Self> {
        let mut r = ByteReader::open(data, DATASET_MAGIC)?;
        let version = r.u16()?;
        if version != DATASET_VERSION {
            return Err(Error::Version {
                found: version,
                expected: DATASET_VERSION,
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
        let params = EpidemicParams {
            beta: r.f64()?,
            mu: r.f64()?,
        };
        let duration = match r.u8()? {
            0 => DurationSpec::Fixed(r.f64()?),
            1 => DurationSpec::UniformUpTo(r.f64()?),
            t => return Err(Error::Corrupt(format!("unknown duration tag {t}"))),
        };
        let n_per_source = r.u32()? as usize;
        let master_seed = r.u64()?;
        let count = r.u64()? as usize;
        let width = node_count.div_ceil(4);
        let mut records = Vec::with_capacity(count.min(data.len()));
        for _ in 0..count {
            let source = r.u32()? as usize;
            let time = r.f64()?;
            let seed = r.u64()?;
            let states = unpack_states(r.take(width)?, node_count)?;
            if source >= node_count {
                return Err(Error::Corrupt(format!("record source {source} out of range")));
            }
            records.push(OutbreakRecord {
                source,
                snapshot: Snapshot::new(states, time),
                seed,
            });
        }
        r.finish()?;
        Ok(SimDataset {
            graph_id,
            node_count,
            params,
            duration,
            n_per_source,
            master_seed,
            records,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>, graph: Option<&Graph>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?, graph)
    }

    /// Content hash of the serialized dataset.
    pub fn content_hash(&self) -> String {
        crate::codec::sha256_hex(&self.to_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epidemics::generate_dataset;
    use proptest::prelude::*;

    fn small() -> (Graph, SimDataset) {
        let g = Graph::from_index_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let p = EpidemicParams::new(1.5, 1.0).unwrap();
        let ds = generate_dataset(&g, &p, 7, DurationSpec::uncertain(0.6), 12).unwrap();
        (g, ds)
    }

    #[test]
    fn roundtrip_and_hash_check() {
        let (g, ds) = small();
        let bytes = ds.to_bytes();
        assert_eq!(SimDataset::from_bytes(&bytes, Some(&g)).unwrap(), ds);
        let other = Graph::from_index_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert!(matches!(
            SimDataset::from_bytes(&bytes, Some(&other)),
            Err(Error::HashMismatch { .. })
        ));
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let (_, ds) = small();
        let bytes = ds.to_bytes();
        for cut in [3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(SimDataset::from_bytes(&bytes[..cut], None), Err(Error::Corrupt(_))));
        }
    }

    #[test]
    fn version_mismatch_detected() {
        let (_, ds) = small();
        let mut w = ByteWriter::new();
        let bytes = ds.to_bytes();
        let body = &bytes[..bytes.len() - 32];
        w.bytes(&body[..4]);
        w.u16(DATASET_VERSION + 1);
        w.bytes(&body[6..]);
        assert!(matches!(
            SimDataset::from_bytes(&w.finish(), None),
            Err(Error::Version { found: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn packing_roundtrips(codes in proptest::collection::vec(0u8..3, 1..70)) {
            let states: Vec<NodeState> = codes.iter().map(|&c| NodeState::from_code(c).unwrap()).collect();
            let mut buf = Vec::new();
            pack_states(&states, &mut buf);
            prop_assert_eq!(buf.len(), states.len().div_ceil(4));
            prop_assert_eq!(unpack_states(&buf, states.len()).unwrap(), states);
        }
    }
}
