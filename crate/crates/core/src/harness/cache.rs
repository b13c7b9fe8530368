use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::codec::sha256_hex;
use crate::epidemics::{generate_dataset, DurationSpec, EpidemicParams, SimDataset};
use crate::error::Result;
use crate::estimators::{mcmf_state_probs, StateProbTable};
use crate::netgraph::Graph;
use crate::nnet::{train, LearningCurve, ModelBundle, ModelConfig, TrainConfig};

/// On-disk store of stage artifacts, each file named by a hash of every
/// input that determines it. A file that fails to decode or whose upstream
/// hash does not match is rebuilt.
#[derive(Debug, Clone)]
pub struct StageCache {
    dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct DatasetKey<'a> {
    graph: &'a str,
    params: &'a EpidemicParams,
    n: usize,
    duration: &'a DurationSpec,
    seed: u64,
}

#[derive(Serialize)]
struct ModelKey<'a> {
    dataset: &'a str,
    model: &'a ModelConfig,
    train: &'a TrainConfig,
    seed: u64,
}

fn key_of(kind: &str, v: &impl Serialize) -> String {
    let json = serde_json::to_vec(v).expect("keys serialize");
    format!("{kind}-{}", &sha256_hex(&json)[..20])
}

impl StageCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir: Some(dir) })
    }

    /// Computes everything, stores nothing.
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    fn store(path: &Path, bytes: &[u8]) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    fn cached<T>(&self, name: &str, load: impl Fn(&Path) -> Result<T>, build: impl FnOnce() -> Result<T>, bytes: impl Fn(&T) -> Vec<u8>) -> Result<T> {
        let Some(path) = self.path(name) else {
            return build();
        };
        if path.exists() {
            match load(&path) {
                Ok(v) => {
                    log::debug!("cache hit {name}");
                    return Ok(v);
                }
                Err(e) => log::warn!("discarding cached {name}: {e}"),
            }
        }
        let v = build()?;
        Self::store(&path, &bytes(&v))?;
        Ok(v)
    }

    pub fn dataset(&self, g: &Graph, params: &EpidemicParams, n_per_source: usize, duration: DurationSpec, seed: u64) -> Result<SimDataset> {
        let graph = g.content_hash();
        let name = key_of(
            "data",
            &DatasetKey {
                graph: &graph,
                params,
                n: n_per_source,
                duration: &duration,
                seed,
            },
        ) + ".sdds";
        self.cached(
            &name,
            |p| {
                let ds = SimDataset::load(p, Some(g))?;
                if ds.n_per_source != n_per_source || ds.master_seed != seed || ds.params != *params || ds.duration != duration {
                    return Err(crate::Error::Corrupt("dataset header does not match its key".into()));
                }
                Ok(ds)
            },
            || generate_dataset(g, params, n_per_source, duration, seed),
            |ds| ds.to_bytes(),
        )
    }

    pub fn mcmf_table(&self, g: &Graph, dataset: &SimDataset, dataset_hash: &str) -> Result<StateProbTable> {
        let name = key_of("mcmf", &dataset_hash) + ".sdpt";
        self.cached(&name, |p| StateProbTable::load(p, Some(g)), || mcmf_state_probs(dataset), |t| t.to_bytes())
    }

    /// Trained bundle and its learning curve.
    pub fn gnn(
        &self,
        g: &Graph,
        dataset: &SimDataset,
        dataset_hash: &str,
        model: &ModelConfig,
        train_cfg: &TrainConfig,
        seed: u64,
    ) -> Result<(ModelBundle, LearningCurve)> {
        let stem = key_of(
            "gnn",
            &ModelKey {
                dataset: dataset_hash,
                model,
                train: train_cfg,
                seed,
            },
        );
        let curve_name = format!("{stem}.curve.json");
        let bundle_name = format!("{stem}.sdmb");
        if let (Some(bp), Some(cp)) = (self.path(&bundle_name), self.path(&curve_name)) {
            if bp.exists() && cp.exists() {
                let loaded = ModelBundle::load(&bp).and_then(|b| {
                    if b.graph_id != g.content_hash() || b.config != *model {
                        return Err(crate::Error::Corrupt("bundle does not match its key".into()));
                    }
                    let curve: LearningCurve = serde_json::from_slice(&std::fs::read(&cp)?)?;
                    Ok((b, curve))
                });
                match loaded {
                    Ok(v) => return Ok(v),
                    Err(e) => log::warn!("discarding cached {stem}: {e}"),
                }
            }
        }
        let out = train(dataset, g, model, train_cfg, seed)?;
        if let (Some(bp), Some(cp)) = (self.path(&bundle_name), self.path(&curve_name)) {
            Self::store(&bp, &out.bundle.to_bytes())?;
            Self::store(&cp, &serde_json::to_vec(&out.curve)?)?;
        }
        Ok((out.bundle, out.curve))
    }

    /// Small JSON values (tuned configs, calibrated durations).
    pub fn json<T: Serialize + serde::de::DeserializeOwned>(&self, kind: &str, key: &impl Serialize, build: impl FnOnce() -> Result<T>) -> Result<T> {
        let name = key_of(kind, key) + ".json";
        self.cached(
            &name,
            |p| Ok(serde_json::from_slice(&std::fs::read(p)?)?),
            build,
            |v| serde_json::to_vec_pretty(v).expect("serializes"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reuses_and_rebuilds() {
        let dir = tempfile::tempdir().unwrap();
        let cache = StageCache::new(dir.path()).unwrap();
        let g = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let p = EpidemicParams::new(1.0, 1.0).unwrap();
        let a = cache.dataset(&g, &p, 5, DurationSpec::Fixed(1.0), 3).unwrap();
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
        assert_eq!(files.len(), 1);
        assert_eq!(cache.dataset(&g, &p, 5, DurationSpec::Fixed(1.0), 3).unwrap(), a);

        // corrupt file is replaced by a fresh build
        std::fs::write(&files[0], b"junk").unwrap();
        assert_eq!(cache.dataset(&g, &p, 5, DurationSpec::Fixed(1.0), 3).unwrap(), a);
        assert_ne!(std::fs::read(&files[0]).unwrap(), b"junk");

        // a different graph never reads this file
        let h = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_ne!(cache.dataset(&h, &p, 5, DurationSpec::Fixed(1.0), 3).unwrap().graph_id, a.graph_id);

        let hash = a.content_hash();
        let t = cache.mcmf_table(&g, &a, &hash).unwrap();
        assert_eq!(cache.mcmf_table(&g, &a, &hash).unwrap(), t);
        let v: f64 = cache.json("x", &1, || Ok(2.5)).unwrap();
        assert_eq!(cache.json("x", &1, || -> Result<f64> { unreachable!() }).unwrap(), v);
    }
}
