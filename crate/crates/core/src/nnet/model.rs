use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tape::{BatchLayout, BnBatchStats, Tape, Var};
use crate::epidemics::Snapshot;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

/// One-hot S/I/R.
pub const STATE_FEATURES: usize = 3;
/// One-hot plus degree, betweenness, closeness and clustering.
pub const AUGMENTED_FEATURES: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_pre: usize,
    pub pre_dim: usize,
    pub n_mp: usize,
    pub mp_dim: usize,
    pub n_post: usize,
    pub skip: bool,
    pub dropout: f64,
    pub in_features: usize,
}

impl ModelConfig {
    /// Best Karate configuration from the tuning runs.
    pub fn karate() -> Self {
        Self {
            n_pre: 1,
            pre_dim: 16,
            n_mp: 3,
            mp_dim: 16,
            n_post: 0,
            skip: true,
            dropout: 0.1,
            in_features: STATE_FEATURES,
        }
    }

    /// Best Dolphin configuration from the tuning runs.
    pub fn dolphin() -> Self {
        Self {
            n_pre: 0,
            pre_dim: 16,
            n_mp: 5,
            mp_dim: 64,
            n_post: 0,
            skip: false,
            dropout: 0.1,
            in_features: STATE_FEATURES,
        }
    }

    pub fn augmented(&self) -> bool {
        self.in_features == AUGMENTED_FEATURES
    }

    pub fn with_augmentation(mut self, on: bool) -> Self {
        self.in_features = if on { AUGMENTED_FEATURES } else { STATE_FEATURES };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(format!("model config: {m}")));
        if self.n_pre > 2 {
            return bad("n_pre must be 0..=2");
        }
        if ![16, 32, 64].contains(&self.pre_dim) {
            return bad("pre_dim must be 16, 32 or 64");
        }
        if !(2..=8).contains(&self.n_mp) {
            return bad("n_mp must be 2..=8");
        }
        if ![16, 32, 64, 128].contains(&self.mp_dim) {
            return bad("mp_dim must be 16, 32, 64 or 128");
        }
        if self.n_post > 2 {
            return bad("n_post must be 0..=2");
        }
        if !(0.0..=0.3).contains(&self.dropout) {
            return bad("dropout must lie in [0, 0.3]");
        }
        if self.in_features != STATE_FEATURES && self.in_features != AUGMENTED_FEATURES {
            return bad("in_features must be 3 or 7");
        }
        Ok(())
    }

    /// Layer stack as (name prefix, input width, output width, message passing).
    fn layers(&self) -> Vec<(String, usize, usize, bool)> {
        let mut out = Vec::new();
        let mut width = self.in_features;
        for i in 0..self.n_pre {
            out.push((format!("pre.{i}"), width, self.pre_dim, false));
            width = self.pre_dim;
        }
        for i in 0..self.n_mp {
            out.push((format!("mp.{i}"), width, self.mp_dim, true));
            width = self.mp_dim;
        }
        for i in 0..self.n_post {
            out.push((format!("post.{i}"), width, self.mp_dim, false));
        }
        out
    }

    /// Names and shapes of every parameter and buffer, in storage order.
    pub fn param_shapes(&self) -> Vec<(String, (usize, usize))> {
        let mut out = Vec::new();
        for (name, fan_in, dim, mp) in self.layers() {
            if mp {
                out.push((format!("{name}.w_self"), (fan_in, dim)));
                out.push((format!("{name}.w_neigh"), (fan_in, dim)));
            } else {
                out.push((format!("{name}.weight"), (fan_in, dim)));
            }
            out.push((format!("{name}.bias"), (1, dim)));
            out.push((format!("{name}.bn_weight"), (1, dim)));
            out.push((format!("{name}.bn_bias"), (1, dim)));
            out.push((format!("{name}.running_mean"), (1, dim)));
            out.push((format!("{name}.running_var"), (1, dim)));
            out.push((format!("{name}.prelu"), (1, 1)));
        }
        let last = if self.n_pre + self.n_mp + self.n_post == 0 { self.in_features } else { self.mp_dim };
        let head = last + if self.skip { self.in_features } else { 0 };
        out.push(("out.weight".into(), (head, 1)));
        out.push(("out.bias".into(), (1, 1)));
        out
    }
}

/// Running statistics are buffers updated outside the optimizer.
pub fn is_trainable(name: &str) -> bool {
    !name.ends_with(".running_mean") && !name.ends_with(".running_var")
}

/// Named parameter tensors in the order given by [`ModelConfig::param_shapes`].
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub names: Vec<String>,
    pub values: Vec<Array2<f64>>,
}

impl Params {
    /// Uniform fan-in initialization `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` for
    /// linear weights and biases; batch norm starts at identity, PReLU at 0.25.
    pub fn init(cfg: &ModelConfig, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let shapes = cfg.param_shapes();
        let mut fan_in = 1;
        let mut names = Vec::with_capacity(shapes.len());
        let mut values = Vec::with_capacity(shapes.len());
        for (name, (r, c)) in shapes {
            let kind = name.rsplit('.').next().unwrap().to_string();
            let v = match kind.as_str() {
                "weight" | "w_self" | "w_neigh" => {
                    fan_in = r;
                    uniform(&mut rng, (r, c), fan_in)
                }
                "bias" => uniform(&mut rng, (r, c), fan_in),
                "bn_weight" | "running_var" => Array2::ones((r, c)),
                "prelu" => Array2::from_elem((r, c), 0.25),
                _ => Array2::zeros((r, c)),
            };
            names.push(name);
            values.push(v);
        }
        Self { names, values }
    }

    pub fn index(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("no parameter {name}"))
    }

    pub fn get(&self, name: &str) -> &Array2<f64> {
        &self.values[self.index(name)]
    }

    pub fn count(&self) -> usize {
        self.values
            .iter()
            .zip(&self.names)
            .filter(|(_, n)| is_trainable(n))
            .map(|(v, _)| v.len())
            .sum()
    }
}

fn uniform(rng: &mut SimRng, shape: (usize, usize), fan_in: usize) -> Array2<f64> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    Array2::from_shape_simple_fn(shape, || rng.gen_range(-bound..bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics and dropout.
    Train,
    /// Running statistics, no dropout.
    Eval,
}

/// Node feature rows for a batch of snapshots over one graph.
pub fn batch_features(snapshots: &[&Snapshot], augmentation: Option<&[[f64; 4]]>) -> Array2<f64> {
    let n = snapshots.first().map_or(0, |s| s.node_count());
    let width = if augmentation.is_some() { AUGMENTED_FEATURES } else { STATE_FEATURES };
    let mut x = Array2::zeros((n * snapshots.len(), width));
    for (k, s) in snapshots.iter().enumerate() {
        for (v, st) in s.states.iter().enumerate() {
            let r = k * n + v;
            x[[r, st.index()]] = 1.0;
            if let Some(aug) = augmentation {
                for (j, f) in aug[v].iter().enumerate() {
                    x[[r, STATE_FEATURES + j]] = *f;
                }
            }
        }
    }
    x
}

/// Result of one forward pass: the tape, the per-node log-probability
/// column, the tape handles of the parameters, and the batch-norm batch
/// statistics (training mode) in layer order.
pub struct Forward {
    pub tape: Tape,
    pub log_probs: Var,
    pub param_vars: Vec<Var>,
    pub bn_stats: Vec<BnBatchStats>,
}

/// Runs the network. Dropout masks come from `rng` in training mode; pass
/// `None` to disable dropout.
pub fn forward(
    cfg: &ModelConfig,
    params: &Params,
    x: Array2<f64>,
    layout: &Arc<BatchLayout>,
    mode: Mode,
    mut rng: Option<&mut SimRng>,
) -> Result<Forward> {
    if x.ncols() != cfg.in_features {
        return Err(Error::Shape(format!(
            "features have width {}, model expects {}",
            x.ncols(),
            cfg.in_features
        )));
    }
    if x.nrows() != layout.rows() {
        return Err(Error::Shape(format!("{} feature rows for {} nodes", x.nrows(), layout.rows())));
    }
    let mut tape = Tape::new();
    let param_vars: Vec<Var> = params.values.iter().map(|v| tape.leaf(v.clone())).collect();
    let p = |name: &str| param_vars[params.index(name)];
    let input = tape.leaf(x);
    let mut h = input;
    let mut bn_stats = Vec::new();
    for (name, _, _, mp) in cfg.layers() {
        let z = if mp {
            let own = tape.matmul(h, p(&format!("{name}.w_self")));
            let agg = match mode {
                Mode::Train => tape.aggregate(h, layout),
                Mode::Eval => tape.aggregate_sorted(h, layout),
            };
            let neigh = tape.matmul(agg, p(&format!("{name}.w_neigh")));
            tape.add(own, neigh)
        } else {
            tape.matmul(h, p(&format!("{name}.weight")))
        };
        let z = tape.add_row(z, p(&format!("{name}.bias")));
        let (gamma, beta) = (p(&format!("{name}.bn_weight")), p(&format!("{name}.bn_bias")));
        let z = match mode {
            Mode::Train => {
                let (z, stats) = tape.batch_norm(z, gamma, beta);
                bn_stats.push(stats);
                z
            }
            Mode::Eval => tape.batch_norm_frozen(
                z,
                gamma,
                beta,
                params.get(&format!("{name}.running_mean")),
                params.get(&format!("{name}.running_var")),
            ),
        };
        h = tape.prelu(z, p(&format!("{name}.prelu")));
        if mode == Mode::Train && cfg.dropout > 0.0 {
            if let Some(rng) = rng.as_deref_mut() {
                let keep = 1.0 - cfg.dropout;
                let mask = Array2::from_shape_simple_fn(tape.value(h).raw_dim(), || {
                    if rng.gen::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                });
                h = tape.scale(h, mask);
            }
        }
    }
    if cfg.skip {
        h = tape.concat(h, input);
    }
    let scores = tape.matmul(h, p("out.weight"));
    let scores = tape.add_row(scores, p("out.bias"));
    let log_probs = tape.segment_log_softmax(scores, layout);
    Ok(Forward {
        tape,
        log_probs,
        param_vars,
        bn_stats,
    })
}
