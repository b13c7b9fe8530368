use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;

use super::model::{batch_features, forward, is_trainable, Mode, ModelConfig, Params};
use super::tape::{Adjacency, BatchLayout};
use crate::epidemics::{NodeState, Snapshot};
use crate::error::{Error, Result};
use crate::netgraph::Graph;
use crate::rng::rng_from_seed;

const STEP: f64 = 1e-5;
/// Gradients smaller than this are compared on an absolute scale.
const FLOOR: f64 = 1e-5;

/// Relative disagreement of two derivative estimates.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

/// Compares reverse-mode gradients of the NLL loss with central finite
/// differences for every trainable parameter entry, in both training
/// (batch statistics) and evaluation (running statistics) mode, with
/// dropout off. Returns the largest relative error.
///
/// PReLU is not differentiable at zero; parameter entries whose perturbation
/// moves some PReLU input across zero are skipped.
pub fn gradient_check(model_cfg: &ModelConfig, g: &Graph, seed: u64) -> Result<f64> {
    let n = g.node_count();
    if n == 0 || n > 10 {
        return Err(Error::Invalid("gradient check expects 1..=10 nodes".into()));
    }
    let mut cfg = model_cfg.clone();
    cfg.dropout = 0.0;
    cfg.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut params = Params::init(&cfg, seed);
    // move batch norm away from the identity so every term matters
    for (name, v) in params.names.iter().zip(params.values.iter_mut()) {
        if name.ends_with("running_mean") || name.ends_with("bn_bias") {
            v.mapv_inplace(|_| rng.gen_range(-0.3..0.3));
        } else if name.ends_with("running_var") || name.ends_with("bn_weight") {
            v.mapv_inplace(|_| rng.gen_range(0.6..1.6));
        }
    }
    let copies = 3;
    let snaps: Vec<Snapshot> = (0..copies)
        .map(|_| Snapshot::new((0..n).map(|_| NodeState::ALL[rng.gen_range(0..3)]).collect(), 1.0))
        .collect();
    let refs: Vec<&Snapshot> = snaps.iter().collect();
    let aug = cfg.augmented().then(|| crate::netgraph::node_feature_augmentation(g));
    let x = batch_features(&refs, aug.as_deref());
    let layout = Arc::new(BatchLayout::repeated(Adjacency::from_graph(g), copies));
    let targets: Vec<usize> = (0..copies).map(|k| k * n + rng.gen_range(0..n)).collect();

    let mut worst = 0.0f64;
    for mode in [Mode::Train, Mode::Eval] {
        let loss_of = |p: &Params| -> Result<(f64, Vec<f64>)> {
            let f = forward(&cfg, p, x.clone(), &layout, mode, None)?;
            let mut tape = f.tape;
            let loss = tape.nll(f.log_probs, targets.clone());
            Ok((tape.value(loss)[[0, 0]], tape.prelu_inputs()))
        };
        let f = forward(&cfg, &params, x.clone(), &layout, mode, None)?;
        let mut tape = f.tape;
        let loss = tape.nll(f.log_probs, targets.clone());
        let grads = tape.backward(loss);
        let base_signs = tape.prelu_inputs();
        for (i, var) in f.param_vars.iter().enumerate() {
            if !is_trainable(&params.names[i]) {
                continue;
            }
            let analytic = grads[var.index()].clone().unwrap_or_else(|| Array2::zeros(params.values[i].raw_dim()));
            for idx in ndarray::indices(params.values[i].dim()) {
                let orig = params.values[i][idx];
                params.values[i][idx] = orig + STEP;
                let (up, s_up) = loss_of(&params)?;
                params.values[i][idx] = orig - STEP;
                let (down, s_down) = loss_of(&params)?;
                params.values[i][idx] = orig;
                if crosses_zero(&base_signs, &s_up) || crosses_zero(&base_signs, &s_down) {
                    continue;
                }
                let numeric = (up - down) / (2.0 * STEP);
                worst = worst.max(relative_error(analytic[idx], numeric));
            }
        }
    }
    Ok(worst)
}

fn crosses_zero(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).any(|(x, y)| (*x > 0.0) != (*y > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnet::tape::Tape;

    #[test]
    fn linear_chain_is_exact() {
        // scores = X W + b, log-softmax, NLL: no kinks, no normalization
        let g = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let layout = Arc::new(BatchLayout::repeated(Adjacency::from_graph(&g), 2));
        let x = Array2::from_shape_fn((8, 3), |(r, c)| ((r * 5 + c * 2) % 7) as f64 / 7.0);
        let w0 = ndarray::array![[0.3], [-0.7], [0.2]];
        let loss = |w: &Array2<f64>| {
            let mut t = Tape::new();
            let xv = t.leaf(x.clone());
            let wv = t.leaf(w.clone());
            let b = t.leaf(ndarray::array![[0.1]]);
            let s = t.matmul(xv, wv);
            let s = t.add_row(s, b);
            let lp = t.segment_log_softmax(s, &layout);
            let l = t.nll(lp, vec![2, 5]);
            (t, wv, l)
        };
        let (t, wv, l) = loss(&w0);
        let grads = t.backward(l);
        let an = grads[wv.index()].as_ref().unwrap();
        for i in 0..3 {
            let mut up = w0.clone();
            up[[i, 0]] += STEP;
            let mut dn = w0.clone();
            dn[[i, 0]] -= STEP;
            let (tu, _, lu) = loss(&up);
            let (td, _, ld) = loss(&dn);
            let num = (tu.value(lu)[[0, 0]] - td.value(ld)[[0, 0]]) / (2.0 * STEP);
            assert!(relative_error(an[[i, 0]], num) < 1e-8);
        }
    }

    #[test]
    fn full_models_pass() {
        let g = Graph::from_index_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)]).unwrap();
        let mut cfg = ModelConfig {
            n_pre: 2,
            pre_dim: 16,
            n_mp: 2,
            mp_dim: 16,
            n_post: 1,
            skip: true,
            dropout: 0.2,
            in_features: 3,
        };
        assert!(gradient_check(&cfg, &g, 1).unwrap() < 1e-4);
        cfg = cfg.with_augmentation(true);
        cfg.skip = false;
        cfg.n_pre = 0;
        assert!(gradient_check(&cfg, &g, 2).unwrap() < 1e-4);
    }
}
