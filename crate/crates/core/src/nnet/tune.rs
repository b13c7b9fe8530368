use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::ModelConfig;
use super::train::{train, TrainConfig};
use crate::epidemics::SimDataset;
use crate::error::{Error, Result};
use crate::netgraph::Graph;
use crate::rng::{derive_seed, rng_from_seed};

/// Candidate values per hyperparameter. Defaults are the full design space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub n_pre: Vec<usize>,
    pub pre_dim: Vec<usize>,
    pub n_mp: Vec<usize>,
    pub mp_dim: Vec<usize>,
    pub n_post: Vec<usize>,
    pub skip: Vec<bool>,
    pub dropout: Vec<f64>,
    pub augmented: bool,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            n_pre: vec![0, 1, 2],
            pre_dim: vec![16, 32, 64],
            n_mp: (2..=8).collect(),
            mp_dim: vec![16, 32, 64, 128],
            n_post: vec![0, 1, 2],
            skip: vec![true, false],
            dropout: vec![0.0, 0.1, 0.2, 0.3],
            augmented: false,
        }
    }
}

impl SearchSpace {
    /// The space containing exactly one configuration.
    pub fn single(cfg: &ModelConfig) -> Self {
        Self {
            n_pre: vec![cfg.n_pre],
            pre_dim: vec![cfg.pre_dim],
            n_mp: vec![cfg.n_mp],
            mp_dim: vec![cfg.mp_dim],
            n_post: vec![cfg.n_post],
            skip: vec![cfg.skip],
            dropout: vec![cfg.dropout],
            augmented: cfg.augmented(),
        }
    }

    fn sample(&self, rng: &mut crate::rng::SimRng) -> Result<ModelConfig> {
        fn pick<T: Copy>(v: &[T], rng: &mut crate::rng::SimRng, what: &str) -> Result<T> {
            v.choose(rng)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("search space has no {what} values")))
        }
        let cfg = ModelConfig {
            n_pre: pick(&self.n_pre, rng, "n_pre")?,
            pre_dim: pick(&self.pre_dim, rng, "pre_dim")?,
            n_mp: pick(&self.n_mp, rng, "n_mp")?,
            mp_dim: pick(&self.mp_dim, rng, "mp_dim")?,
            n_post: pick(&self.n_post, rng, "n_post")?,
            skip: pick(&self.skip, rng, "skip")?,
            dropout: pick(&self.dropout, rng, "dropout")?,
            in_features: 0,
        }
        .with_augmentation(self.augmented);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub trial: usize,
    pub config: ModelConfig,
    /// Mean validation loss over the last five epochs before stopping.
    pub objective: f64,
    pub epochs_run: usize,
    pub best_val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: ModelConfig,
    pub best_objective: f64,
    pub trials: Vec<TrialLog>,
}

impl TuneResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,n_pre,pre_dim,n_mp,mp_dim,n_post,skip,dropout,objective,epochs_run,best_val_loss\n");
        for t in &self.trials {
            let c = &t.config;
            out += &format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                t.trial, c.n_pre, c.pre_dim, c.n_mp, c.mp_dim, c.n_post, c.skip, c.dropout, t.objective, t.epochs_run, t.best_val_loss
            );
        }
        out
    }
}

/// Seeded random search: each trial draws every hyperparameter uniformly
/// from its candidate list and trains with early stopping.
pub fn tune(space: &SearchSpace, dataset: &SimDataset, g: &Graph, train_cfg: &TrainConfig, trials: usize, seed: u64) -> Result<TuneResult> {
    if trials == 0 {
        return Err(Error::Invalid("need at least one trial".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut logs = Vec::with_capacity(trials);
    for trial in 0..trials {
        let config = space.sample(&mut rng)?;
        let out = train(dataset, g, &config, train_cfg, derive_seed(seed, trial as u64))?;
        let objective = out.curve.tail_val_loss(5);
        log::info!("trial {trial}: objective {objective:.4} after {} epochs", out.bundle.meta.epochs_run);
        logs.push(TrialLog {
            trial,
            config,
            objective,
            epochs_run: out.bundle.meta.epochs_run,
            best_val_loss: out.bundle.meta.best_val_loss,
        });
    }
    let best = logs
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .expect("at least one trial");
    Ok(TuneResult {
        best: best.config.clone(),
        best_objective: best.objective,
        trials: logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epidemics::{generate_dataset, DurationSpec, EpidemicParams};

    fn small() -> (Graph, SimDataset) {
        let g = Graph::from_index_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let ds = generate_dataset(&g, &EpidemicParams::new(2.0, 1.0).unwrap(), 10, DurationSpec::Fixed(0.5), 8).unwrap();
        (g, ds)
    }

    fn fast() -> TrainConfig {
        TrainConfig {
            lr: 0.01,
            batch_size: 16,
            max_epochs: 12,
            patience: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn single_point_space_returns_it() {
        let (g, ds) = small();
        let mut cfg = ModelConfig::karate();
        cfg.n_mp = 2;
        let r = tune(&SearchSpace::single(&cfg), &ds, &g, &fast(), 2, 1).unwrap();
        assert_eq!(r.best, cfg);
        assert_eq!(r.trials.len(), 2);
    }

    #[test]
    fn picks_lowest_objective() {
        let (g, ds) = small();
        let space = SearchSpace {
            n_pre: vec![0],
            pre_dim: vec![16],
            n_mp: vec![2],
            mp_dim: vec![16, 64],
            n_post: vec![0],
            skip: vec![true],
            dropout: vec![0.0],
            augmented: false,
        };
        let r = tune(&space, &ds, &g, &fast(), 4, 3).unwrap();
        let min = r.trials.iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_objective, min);
        assert!(r.to_csv().lines().count() == 5);
        assert!(tune(&space, &ds, &g, &fast(), 0, 3).is_err());
    }
}
