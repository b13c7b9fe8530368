use std::collections::HashMap;
use std::sync::Arc;

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::bundle::{ModelBundle, TrainMeta};
use super::model::{batch_features, forward, is_trainable, Mode, ModelConfig, Params};
use super::tape::{Adjacency, BatchLayout};
use crate::epidemics::{SimDataset, Snapshot};
use crate::error::{Error, Result};
use crate::netgraph::{node_feature_augmentation, Graph};
use crate::rng::{derive_named, derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    /// Decay the weights directly (AdamW) instead of adding `wd*θ` to the gradient.
    pub decoupled_weight_decay: bool,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Share of each source's records used for training; the rest validates.
    pub train_fraction: f64,
    pub bn_momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            weight_decay: 5e-4,
            decoupled_weight_decay: true,
            batch_size: 128,
            max_epochs: 500,
            patience: 5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            train_fraction: 0.7,
            bn_momentum: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.lr, self.eps, self.bn_momentum];
        if positive.iter().any(|x| !(*x > 0.0)) || self.weight_decay < 0.0 {
            return Err(Error::Invalid("lr, eps and momentum must be positive".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Invalid("batch size, epochs and patience must be positive".into()));
        }
        if self.patience >= self.max_epochs {
            return Err(Error::Invalid("patience must be below max_epochs".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Invalid("Adam betas must lie in [0, 1)".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Invalid("train_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// First and second moment estimates for every parameter slot.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Vec<Array2<f64>>,
    pub v: Vec<Array2<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &Params) -> Self {
        let zeros: Vec<Array2<f64>> = params.values.iter().map(|p| Array2::zeros(p.raw_dim())).collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }
}

/// One Adam update with bias correction. `grads[i]` is `None` for buffers
/// and parameters the loss did not reach.
pub fn adam_step(params: &mut Params, grads: &[Option<Array2<f64>>], state: &mut AdamState, cfg: &TrainConfig) {
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (i, theta) in params.values.iter_mut().enumerate() {
        if !is_trainable(&params.names[i]) {
            continue;
        }
        let Some(g) = &grads[i] else { continue };
        let mut g = g.clone();
        if cfg.decoupled_weight_decay {
            theta.mapv_inplace(|w| w * (1.0 - cfg.lr * cfg.weight_decay));
        } else if cfg.weight_decay > 0.0 {
            g.scaled_add(cfg.weight_decay, theta);
        }
        let m = &mut state.m[i];
        let v = &mut state.v[i];
        ndarray::Zip::from(theta)
            .and(m)
            .and(v)
            .and(&g)
            .for_each(|w, m, v, &g| {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                *w -= cfg.lr * (*m / c1) / ((*v / c2).sqrt() + cfg.eps);
            });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_top1: f64,
    pub val_top1: f64,
}

/// Per-epoch losses and accuracies. Epoch 0 is the untrained model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub epochs: Vec<EpochRecord>,
}

impl LearningCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,train_top1,val_top1\n");
        for e in &self.epochs {
            out += &format!(
                "{},{},{},{},{}\n",
                e.epoch, e.train_loss, e.val_loss, e.train_top1, e.val_top1
            );
        }
        out
    }

    /// Mean validation loss over the last five recorded epochs before the stop.
    pub fn tail_val_loss(&self, k: usize) -> f64 {
        let trained: Vec<&EpochRecord> = self.epochs.iter().filter(|e| e.epoch > 0).collect();
        let tail = &trained[trained.len().saturating_sub(k)..];
        tail.iter().map(|e| e.val_loss).sum::<f64>() / tail.len().max(1) as f64
    }

    pub fn best_val_loss(&self) -> f64 {
        self.epochs
            .iter()
            .filter(|e| e.epoch > 0)
            .map(|e| e.val_loss)
            .fold(f64::INFINITY, f64::min)
    }
}

pub struct TrainOutcome {
    pub bundle: ModelBundle,
    pub curve: LearningCurve,
    /// Mean wall-clock seconds per optimisation step (forward, backward, update).
    pub seconds_per_batch: f64,
}

/// Splits record indices per source: the first `fraction` of a seeded
/// shuffle of each source's records trains, the rest validates.
pub fn stratified_split(dataset: &SimDataset, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = dataset.n_per_source;
    if !dataset.is_balanced() || n < 2 {
        return Err(Error::Invalid("stratified split needs a balanced dataset with n >= 2".into()));
    }
    let n_train = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let mut train = Vec::with_capacity(n_train * dataset.node_count);
    let mut val = Vec::with_capacity((n - n_train) * dataset.node_count);
    for q in 0..dataset.node_count {
        let mut idx: Vec<usize> = (q * n..(q + 1) * n).collect();
        idx.shuffle(&mut rng_from_seed(derive_seed(seed, q as u64)));
        train.extend_from_slice(&idx[..n_train]);
        val.extend_from_slice(&idx[n_train..]);
    }
    Ok((train, val))
}

/// Reusable per-graph context: adjacency, optional augmentation and a
/// layout cache keyed by batch size.
pub(crate) struct GraphContext {
    adj: Adjacency,
    pub augmentation: Option<Vec<[f64; 4]>>,
    layouts: HashMap<usize, Arc<BatchLayout>>,
}

impl GraphContext {
    pub fn new(g: &Graph, augmented: bool) -> Self {
        Self {
            adj: Adjacency::from_graph(g),
            augmentation: augmented.then(|| node_feature_augmentation(g)),
            layouts: HashMap::new(),
        }
    }

    pub fn layout(&mut self, copies: usize) -> Arc<BatchLayout> {
        let adj = &self.adj;
        self.layouts
            .entry(copies)
            .or_insert_with(|| Arc::new(BatchLayout::repeated(adj.clone(), copies)))
            .clone()
    }

    pub fn features(&self, snaps: &[&Snapshot]) -> Array2<f64> {
        batch_features(snaps, self.augmentation.as_deref())
    }
}

/// Eval-mode log-probabilities, one column vector per snapshot, in chunks.
pub(crate) fn eval_log_probs(
    cfg: &ModelConfig,
    params: &Params,
    ctx: &mut GraphContext,
    snaps: &[&Snapshot],
    chunk: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(snaps.len());
    for part in snaps.chunks(chunk.max(1)) {
        let layout = ctx.layout(part.len());
        let f = forward(cfg, params, ctx.features(part), &layout, Mode::Eval, None)?;
        let lp = f.tape.value(f.log_probs);
        for seg in &layout.segments {
            out.push(lp.column(0).slice(ndarray::s![seg.offset..seg.offset + seg.size]).to_vec());
        }
    }
    Ok(out)
}

fn argmax(v: &[f64]) -> usize {
    (1..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

/// Mean NLL and top-1 accuracy in eval mode.
fn evaluate(cfg: &ModelConfig, params: &Params, ctx: &mut GraphContext, ds: &SimDataset, idx: &[usize], batch: usize) -> Result<(f64, f64)> {
    let snaps: Vec<&Snapshot> = idx.iter().map(|&i| &ds.records[i].snapshot).collect();
    let lps = eval_log_probs(cfg, params, ctx, &snaps, batch)?;
    let mut loss = 0.0;
    let mut hits = 0usize;
    for (lp, &i) in lps.iter().zip(idx) {
        let q = ds.records[i].source;
        loss -= lp[q];
        hits += (argmax(lp) == q) as usize;
    }
    let n = idx.len().max(1) as f64;
    Ok((loss / n, hits as f64 / n))
}

/// Trains a model with early stopping on the validation loss and returns
/// the parameters from the best validation epoch.
pub fn train(dataset: &SimDataset, g: &Graph, model_cfg: &ModelConfig, train_cfg: &TrainConfig, seed: u64) -> Result<TrainOutcome> {
    model_cfg.validate()?;
    train_cfg.validate()?;
    dataset.check_graph(g)?;
    let (train_idx, val_idx) = stratified_split(dataset, train_cfg.train_fraction, derive_named(seed, "split"))?;
    let mut ctx = GraphContext::new(g, model_cfg.augmented());
    let mut params = Params::init(model_cfg, derive_named(seed, "init"));
    let mut adam = AdamState::new(&params);
    let mut dropout_rng = rng_from_seed(derive_named(seed, "dropout"));
    let shuffle_seed = derive_named(seed, "shuffle");
    let bs = train_cfg.batch_size;
    let bn_slots: Vec<(usize, usize)> = params
        .names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.ends_with(".running_mean"))
        .map(|(i, _)| (i, i + 1))
        .collect();

    let mut curve = LearningCurve::default();
    let (tl, ta) = evaluate(model_cfg, &params, &mut ctx, dataset, &train_idx, bs)?;
    let (vl, va) = evaluate(model_cfg, &params, &mut ctx, dataset, &val_idx, bs)?;
    curve.epochs.push(EpochRecord {
        epoch: 0,
        train_loss: tl,
        val_loss: vl,
        train_top1: ta,
        val_top1: va,
    });

    let mut best = (f64::INFINITY, 0usize, params.clone());
    let mut since_best = 0;
    let mut order = train_idx.clone();
    let (mut step_time, mut steps) = (std::time::Duration::ZERO, 0usize);
    for epoch in 1..=train_cfg.max_epochs {
        order.shuffle(&mut rng_from_seed(derive_seed(shuffle_seed, epoch as u64)));
        let (mut loss_sum, mut hits) = (0.0, 0usize);
        for (b, chunk) in order.chunks(bs).enumerate() {
            let started = std::time::Instant::now();
            let snaps: Vec<&Snapshot> = chunk.iter().map(|&i| &dataset.records[i].snapshot).collect();
            let layout = ctx.layout(chunk.len());
            let f = forward(model_cfg, &params, ctx.features(&snaps), &layout, Mode::Train, Some(&mut dropout_rng))?;
            let mut tape = f.tape;
            let n = g.node_count();
            let targets: Vec<usize> = chunk.iter().enumerate().map(|(k, &i)| k * n + dataset.records[i].source).collect();
            {
                let lp = tape.value(f.log_probs);
                for (k, &t) in targets.iter().enumerate() {
                    let col = lp.column(0);
                    let row = col.slice(ndarray::s![k * n..(k + 1) * n]);
                    let best_v = (1..n).fold(0, |b, v| if row[v] > row[b] { v } else { b });
                    hits += (k * n + best_v == t) as usize;
                }
            }
            let loss = tape.nll(f.log_probs, targets);
            let lv = tape.value(loss)[[0, 0]];
            if !lv.is_finite() {
                return Err(Error::Diverged { epoch, batch: b });
            }
            loss_sum += lv * chunk.len() as f64;
            let grads = tape.backward(loss);
            let param_grads: Vec<Option<Array2<f64>>> = f.param_vars.iter().map(|v| grads[v.index()].clone()).collect();
            adam_step(&mut params, &param_grads, &mut adam, train_cfg);
            let m = train_cfg.bn_momentum;
            for ((mi, vi), stats) in bn_slots.iter().zip(&f.bn_stats) {
                let rm = &mut params.values[*mi];
                *rm = &*rm * (1.0 - m) + &(&stats.mean * m).insert_axis(ndarray::Axis(0));
                let rv = &mut params.values[*vi];
                *rv = &*rv * (1.0 - m) + &(&stats.var * m).insert_axis(ndarray::Axis(0));
            }
            step_time += started.elapsed();
            steps += 1;
        }
        let (vl, va) = evaluate(model_cfg, &params, &mut ctx, dataset, &val_idx, bs)?;
        if !vl.is_finite() {
            return Err(Error::Diverged { epoch, batch: order.len().div_ceil(bs) });
        }
        let n_train = order.len() as f64;
        curve.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / n_train,
            val_loss: vl,
            train_top1: hits as f64 / n_train,
            val_top1: va,
        });
        log::debug!("epoch {epoch}: train {:.4} val {vl:.4} val_top1 {va:.3}", loss_sum / n_train);
        if vl < best.0 {
            best = (vl, epoch, params.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= train_cfg.patience {
                break;
            }
        }
    }
    let last = curve.epochs.last().unwrap().clone();
    let meta = TrainMeta {
        seed,
        epochs_run: last.epoch,
        best_epoch: best.1,
        best_val_loss: best.0,
        final_train_loss: last.train_loss,
        final_val_loss: last.val_loss,
        tail_val_loss: curve.tail_val_loss(5),
    };
    Ok(TrainOutcome {
        bundle: ModelBundle::new(model_cfg.clone(), best.2, meta, g.content_hash()),
        curve,
        seconds_per_batch: step_time.as_secs_f64() / steps.max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epidemics::{generate_dataset, DurationSpec, EpidemicParams, OutbreakRecord};

    fn scalar_params(x: f64) -> Params {
        Params {
            names: vec!["w.weight".into()],
            values: vec![Array2::from_elem((1, 1), x)],
        }
    }

    #[test]
    fn zero_gradient_without_decay_leaves_params() {
        let cfg = TrainConfig {
            weight_decay: 0.0,
            ..TrainConfig::default()
        };
        let mut p = scalar_params(0.7);
        let mut s = AdamState::new(&p);
        for _ in 0..10 {
            adam_step(&mut p, &[Some(Array2::zeros((1, 1)))], &mut s, &cfg);
        }
        assert_eq!(p.values[0][[0, 0]], 0.7);
    }

    #[test]
    fn first_step_closed_form() {
        // after bias correction m̂ = g and v̂ = g², so the step is lr*g/(|g|+eps)
        let cfg = TrainConfig {
            weight_decay: 0.0,
            ..TrainConfig::default()
        };
        for g in [0.3, -2.0, 1e-3] {
            let mut p = scalar_params(1.0);
            let mut s = AdamState::new(&p);
            adam_step(&mut p, &[Some(Array2::from_elem((1, 1), g))], &mut s, &cfg);
            let want = 1.0 - 1e-3 * g / (g.abs() + 1e-8);
            assert!((p.values[0][[0, 0]] - want).abs() < 1e-15);
        }
        // decoupled decay shrinks the weight before the step
        let cfg = TrainConfig::default();
        let mut p = scalar_params(2.0);
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &[Some(Array2::zeros((1, 1)))], &mut s, &cfg);
        assert!((p.values[0][[0, 0]] - 2.0 * (1.0 - 1e-3 * 5e-4)).abs() < 1e-15);
    }

    #[test]
    fn constant_gradient_descends_monotonically() {
        let cfg = TrainConfig::default();
        let mut p = scalar_params(0.0);
        let mut s = AdamState::new(&p);
        let mut prev = 0.0;
        for _ in 0..100 {
            adam_step(&mut p, &[Some(Array2::from_elem((1, 1), 1.5))], &mut s, &cfg);
            let x = p.values[0][[0, 0]];
            assert!(x * 1.5 < prev * 1.5);
            prev = x;
        }
    }

    #[test]
    fn buffers_are_not_optimized() {
        let mut p = Params {
            names: vec!["a.running_mean".into()],
            values: vec![Array2::from_elem((1, 1), 0.5)],
        };
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &[Some(Array2::from_elem((1, 1), 1.0))], &mut s, &TrainConfig::default());
        assert_eq!(p.values[0][[0, 0]], 0.5);
    }

    #[test]
    fn split_is_stratified() {
        let g = Graph::from_index_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let ds = generate_dataset(&g, &EpidemicParams::new(1.0, 1.0).unwrap(), 10, DurationSpec::Fixed(0.5), 1).unwrap();
        let (tr, va) = stratified_split(&ds, 0.7, 5).unwrap();
        assert_eq!(tr.len(), 21);
        assert_eq!(va.len(), 9);
        for q in 0..3 {
            assert_eq!(tr.iter().filter(|&&i| ds.records[i].source == q).count(), 7);
        }
        let mut all: Vec<usize> = tr.iter().chain(&va).copied().collect();
        all.sort();
        assert_eq!(all, (0..30).collect::<Vec<_>>());
    }

    fn memorizable() -> (Graph, SimDataset) {
        // each source always produces the same distinctive snapshot; no two
        // are mirror images, which an equivariant model could not separate
        let g = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let codes = ["ISSS", "RISS", "SRIS", "SSRI"];
        let records = (0..4)
            .flat_map(|q| {
                (0..20).map(move |_| OutbreakRecord {
                    source: q,
                    snapshot: Snapshot::from_code_string(codes[q], 1.0).unwrap(),
                    seed: 0,
                })
            })
            .collect();
        let ds = SimDataset {
            graph_id: g.content_hash(),
            node_count: 4,
            params: EpidemicParams::new(1.0, 1.0).unwrap(),
            duration: DurationSpec::Fixed(1.0),
            n_per_source: 20,
            master_seed: 0,
            records,
        };
        (g, ds)
    }

    fn quick_cfg() -> ModelConfig {
        ModelConfig {
            n_pre: 1,
            pre_dim: 16,
            n_mp: 2,
            mp_dim: 16,
            n_post: 0,
            skip: true,
            dropout: 0.0,
            in_features: 3,
        }
    }

    #[test]
    fn memorizes_identifiable_snapshots() {
        let (g, ds) = memorizable();
        let tc = TrainConfig {
            lr: 0.01,
            batch_size: 16,
            max_epochs: 50,
            patience: 49,
            ..TrainConfig::default()
        };
        let out = train(&ds, &g, &quick_cfg(), &tc, 1).unwrap();
        let reached = out.curve.epochs.iter().any(|e| e.epoch > 0 && e.train_top1 == 1.0);
        assert!(reached);
        let first = out.curve.epochs[0].val_loss;
        assert!(out.bundle.meta.best_val_loss < first);
    }

    #[test]
    fn deterministic_and_returns_best_epoch() {
        let g = Graph::from_index_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let ds = generate_dataset(&g, &EpidemicParams::new(1.5, 1.0).unwrap(), 12, DurationSpec::Fixed(0.6), 3).unwrap();
        let mut mc = quick_cfg();
        mc.dropout = 0.2;
        let tc = TrainConfig {
            batch_size: 8,
            max_epochs: 30,
            patience: 3,
            lr: 0.01,
            ..TrainConfig::default()
        };
        let a = train(&ds, &g, &mc, &tc, 42).unwrap();
        let b = train(&ds, &g, &mc, &tc, 42).unwrap();
        assert_eq!(a.bundle, b.bundle);
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.bundle.meta.best_val_loss, a.curve.best_val_loss());
        // the returned parameters reproduce the best validation loss
        let (_, val) = stratified_split(&ds, tc.train_fraction, derive_named(42, "split")).unwrap();
        let mut ctx = GraphContext::new(&g, false);
        let (vl, _) = evaluate(&mc, &a.bundle.params, &mut ctx, &ds, &val, 8).unwrap();
        assert!((vl - a.bundle.meta.best_val_loss).abs() < 1e-12);
        let c = train(&ds, &g, &mc, &tc, 43).unwrap();
        assert_ne!(a.bundle.params, c.bundle.params);
    }

    #[test]
    fn curve_csv_and_tail() {
        let curve = LearningCurve {
            epochs: (0..8)
                .map(|e| EpochRecord {
                    epoch: e,
                    train_loss: 1.0,
                    val_loss: e as f64,
                    train_top1: 0.0,
                    val_top1: 0.0,
                })
                .collect(),
        };
        assert_eq!(curve.tail_val_loss(5), 5.0);
        assert!(curve.to_csv().starts_with("epoch,train_loss,val_loss,train_top1,val_top1\n0,"));
    }
}
