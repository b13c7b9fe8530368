//! Reverse-mode differentiation over dense row-major matrices.
//!
//! Every value is an `Array2<f64>` whose rows are nodes (or a single row for
//! biases and per-channel parameters). Operations append to a [`Tape`];
//! [`Tape::backward`] walks it once in reverse.

use std::sync::Arc;

use ndarray::{s, Array1, Array2, Axis, Zip};

pub const BN_EPS: f64 = 1e-5;

/// Handle to a value recorded on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Rows of a batch grouped into graphs: segment `k` occupies rows
/// `offset..offset+size` and uses adjacency `adj[graph]`.
#[derive(Debug, Clone)]
pub struct BatchLayout {
    pub segments: Vec<Segment>,
    pub adj: Vec<Adjacency>,
}

#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub offset: usize,
    pub size: usize,
    pub graph: usize,
}

/// Unweighted neighbour lists in CSR form.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub offsets: Vec<usize>,
    pub targets: Vec<usize>,
}

impl Adjacency {
    pub fn from_graph(g: &crate::netgraph::Graph) -> Self {
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        for v in 0..g.node_count() {
            targets.extend_from_slice(g.neighbors(v));
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

impl BatchLayout {
    /// `copies` stacked copies of one graph.
    pub fn repeated(adj: Adjacency, copies: usize) -> Self {
        let n = adj.node_count();
        Self {
            segments: (0..copies)
                .map(|k| Segment {
                    offset: k * n,
                    size: n,
                    graph: 0,
                })
                .collect(),
            adj: vec![adj],
        }
    }

    /// One segment per graph, in order.
    pub fn concat(adjs: Vec<Adjacency>) -> Self {
        let mut offset = 0;
        let segments = adjs
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let s = Segment {
                    offset,
                    size: a.node_count(),
                    graph: k,
                };
                offset += a.node_count();
                s
            })
            .collect();
        Self { segments, adj: adjs }
    }

    pub fn rows(&self) -> usize {
        self.segments.last().map_or(0, |s| s.offset + s.size)
    }

    /// Sum of neighbour rows, block by block.
    fn aggregate(&self, h: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(h.raw_dim());
        for seg in &self.segments {
            let adj = &self.adj[seg.graph];
            for v in 0..seg.size {
                let mut row = out.row_mut(seg.offset + v);
                for &u in &adj.targets[adj.offsets[v]..adj.offsets[v + 1]] {
                    row += &h.row(seg.offset + u);
                }
            }
        }
        out
    }

    /// Same sums with each neighbourhood added in ascending order of value,
    /// so relabelling the nodes cannot change a single bit of the result.
    fn aggregate_sorted(&self, h: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(h.raw_dim());
        let mut buf = Vec::new();
        for seg in &self.segments {
            let adj = &self.adj[seg.graph];
            for v in 0..seg.size {
                let nb = &adj.targets[adj.offsets[v]..adj.offsets[v + 1]];
                for c in 0..h.ncols() {
                    buf.clear();
                    buf.extend(nb.iter().map(|&u| h[[seg.offset + u, c]]));
                    out[[seg.offset + v, c]] = ordered_sum(&mut buf);
                }
            }
        }
        out
    }
}

/// Order-independent sum: sorts, then adds left to right.
fn ordered_sum(buf: &mut [f64]) -> f64 {
    buf.sort_unstable_by(f64::total_cmp);
    buf.iter().fold(0.0, |a, b| a + b)
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Aggregate(Var, Arc<BatchLayout>),
    BatchNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        xhat: Array2<f64>,
        inv_std: Array1<f64>,
    },
    /// Batch norm with frozen statistics: an affine map per channel.
    BatchNormFrozen {
        x: Var,
        gamma: Var,
        beta: Var,
        xhat: Array2<f64>,
        inv_std: Array1<f64>,
    },
    Prelu(Var, Var),
    Scale(Var, Array2<f64>),
    Concat(Var, Var),
    SegmentLogSoftmax(Var, Arc<BatchLayout>),
    Nll(Var, Vec<usize>),
}

#[derive(Debug)]
struct Node {
    value: Array2<f64>,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Batch statistics seen by a training-mode batch norm, for the caller's
/// running-average update.
#[derive(Debug, Clone)]
pub struct BnBatchStats {
    pub mean: Array1<f64>,
    /// Unbiased variance.
    pub var: Array1<f64>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Inputs of every PReLU recorded so far, flattened in tape order.
    pub fn prelu_inputs(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n.op {
                Op::Prelu(x, _) => Some(self.value(x).iter().copied().collect::<Vec<_>>()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    pub fn matmul(&mut self, a: Var, w: Var) -> Var {
        let v = self.value(a).dot(self.value(w));
        self.push(v, Op::MatMul(a, w))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add(a, b))
    }

    /// Adds a `1 x k` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::AddRow(a, b))
    }

    pub fn aggregate(&mut self, h: Var, layout: &Arc<BatchLayout>) -> Var {
        let v = layout.aggregate(self.value(h));
        self.push(v, Op::Aggregate(h, layout.clone()))
    }

    /// [`Tape::aggregate`] with a canonical summation order; slower, used at
    /// inference so outputs are exactly permutation-equivariant.
    pub fn aggregate_sorted(&mut self, h: Var, layout: &Arc<BatchLayout>) -> Var {
        let v = layout.aggregate_sorted(self.value(h));
        self.push(v, Op::Aggregate(h, layout.clone()))
    }

    /// Per-channel normalization over all rows using the batch statistics.
    pub fn batch_norm(&mut self, x: Var, gamma: Var, beta: Var) -> (Var, BnBatchStats) {
        let xv = self.value(x);
        let n = xv.nrows() as f64;
        let mean = xv.mean_axis(Axis(0)).expect("non-empty batch");
        let centered = xv - &mean;
        let var_b = centered.mapv(|c| c * c).sum_axis(Axis(0)) / n;
        let inv_std = var_b.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
        let xhat = &centered * &inv_std;
        let out = &xhat * &self.value(gamma).row(0) + &self.value(beta).row(0);
        let unbiased = if n > 1.0 { &var_b * (n / (n - 1.0)) } else { var_b.clone() };
        let stats = BnBatchStats { mean, var: unbiased };
        let var = self.push(
            out,
            Op::BatchNorm {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
            },
        );
        (var, stats)
    }

    /// Normalization with fixed running statistics.
    pub fn batch_norm_frozen(&mut self, x: Var, gamma: Var, beta: Var, mean: &Array2<f64>, var: &Array2<f64>) -> Var {
        let inv_std = var.row(0).mapv(|v| 1.0 / (v + BN_EPS).sqrt());
        let xhat = (self.value(x) - &mean.row(0)) * &inv_std;
        let out = &xhat * &self.value(gamma).row(0) + &self.value(beta).row(0);
        self.push(
            out,
            Op::BatchNormFrozen {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
            },
        )
    }

    /// `max(x,0) + a*min(x,0)` with a single learnable slope `a` (`1 x 1`).
    pub fn prelu(&mut self, x: Var, a: Var) -> Var {
        let slope = self.value(a)[[0, 0]];
        let v = self.value(x).mapv(|z| if z > 0.0 { z } else { slope * z });
        self.push(v, Op::Prelu(x, a))
    }

    /// Elementwise product with a constant mask (dropout).
    pub fn scale(&mut self, x: Var, mask: Array2<f64>) -> Var {
        let v = self.value(x) * &mask;
        self.push(v, Op::Scale(x, mask))
    }

    /// Column-wise concatenation `[a | b]`.
    pub fn concat(&mut self, a: Var, b: Var) -> Var {
        let v = ndarray::concatenate(Axis(1), &[self.value(a).view(), self.value(b).view()]).expect("row counts match");
        self.push(v, Op::Concat(a, b))
    }

    /// Log-softmax of a score column within each segment.
    pub fn segment_log_softmax(&mut self, x: Var, layout: &Arc<BatchLayout>) -> Var {
        let xv = self.value(x);
        assert_eq!(xv.ncols(), 1, "scores must be a column");
        let mut out = Array2::zeros(xv.raw_dim());
        let mut buf = Vec::new();
        for seg in &layout.segments {
            let col = xv.slice(s![seg.offset..seg.offset + seg.size, 0]);
            let m = col.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            buf.clear();
            buf.extend(col.iter().map(|z| (z - m).exp()));
            let lse = m + ordered_sum(&mut buf).ln();
            out.slice_mut(s![seg.offset..seg.offset + seg.size, 0])
                .assign(&col.mapv(|z| z - lse));
        }
        self.push(out, Op::SegmentLogSoftmax(x, layout.clone()))
    }

    /// Mean of `-logp[row]` over the target rows (one per graph).
    pub fn nll(&mut self, logp: Var, targets: Vec<usize>) -> Var {
        let lp = self.value(logp);
        let loss = -targets.iter().map(|&r| lp[[r, 0]]).sum::<f64>() / targets.len() as f64;
        self.push(Array2::from_elem((1, 1), loss), Op::Nll(logp, targets))
    }

    /// Gradients of the scalar `loss` with respect to every recorded value.
    /// Entries for values the loss does not depend on stay `None`.
    pub fn backward(&self, loss: Var) -> Vec<Option<Array2<f64>>> {
        assert_eq!(self.value(loss).dim(), (1, 1), "loss must be a scalar");
        let mut grads: Vec<Option<Array2<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Array2::ones((1, 1)));
        fn acc(grads: &mut [Option<Array2<f64>>], v: Var, g: Array2<f64>) {
            match &mut grads[v.0] {
                Some(x) => *x += &g,
                slot => *slot = Some(g),
            }
        }
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            match &self.nodes[i].op {
                Op::Leaf => {}
                Op::MatMul(a, w) => {
                    acc(&mut grads, *a, g.dot(&self.value(*w).t()));
                    acc(&mut grads, *w, self.value(*a).t().dot(&g));
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g.clone());
                }
                Op::AddRow(a, b) => {
                    acc(&mut grads, *b, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    acc(&mut grads, *a, g.clone());
                }
                // the block adjacency is symmetric, so its transpose is itself
                Op::Aggregate(h, layout) => acc(&mut grads, *h, layout.aggregate(&g)),
                Op::BatchNorm {
                    x,
                    gamma,
                    beta,
                    xhat,
                    inv_std,
                } => {
                    let n = g.nrows() as f64;
                    acc(&mut grads, *beta, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    acc(&mut grads, *gamma, (&g * xhat).sum_axis(Axis(0)).insert_axis(Axis(0)));
                    let dxhat = &g * &self.value(*gamma).row(0);
                    let sum_d = dxhat.sum_axis(Axis(0));
                    let sum_dx = (&dxhat * xhat).sum_axis(Axis(0));
                    let mut dx = dxhat * n - &sum_d;
                    dx -= &(xhat * &sum_dx);
                    dx *= &(inv_std / n);
                    acc(&mut grads, *x, dx);
                }
                Op::BatchNormFrozen {
                    x,
                    gamma,
                    beta,
                    xhat,
                    inv_std,
                } => {
                    acc(&mut grads, *beta, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    acc(&mut grads, *gamma, (&g * xhat).sum_axis(Axis(0)).insert_axis(Axis(0)));
                    let dx = &g * &(&self.value(*gamma).row(0) * inv_std);
                    acc(&mut grads, *x, dx);
                }
                Op::Prelu(x, a) => {
                    let slope = self.value(*a)[[0, 0]];
                    let xv = self.value(*x);
                    let mut dx = g.clone();
                    let mut da = 0.0;
                    Zip::from(&mut dx).and(xv).and(&g).for_each(|d, &z, &gz| {
                        if z <= 0.0 {
                            *d = slope * gz;
                            da += gz * z;
                        }
                    });
                    acc(&mut grads, *x, dx);
                    acc(&mut grads, *a, Array2::from_elem((1, 1), da));
                }
                Op::Scale(x, mask) => acc(&mut grads, *x, &g * mask),
                Op::Concat(a, b) => {
                    let k = self.value(*a).ncols();
                    acc(&mut grads, *a, g.slice(s![.., ..k]).to_owned());
                    acc(&mut grads, *b, g.slice(s![.., k..]).to_owned());
                }
                Op::SegmentLogSoftmax(x, layout) => {
                    let out = &self.nodes[i].value;
                    let mut dx = g.clone();
                    for seg in &layout.segments {
                        let r = seg.offset..seg.offset + seg.size;
                        let total = g.slice(s![r.clone(), 0]).sum();
                        let p = out.slice(s![r.clone(), 0]).mapv(f64::exp);
                        let mut d = dx.slice_mut(s![r, 0]);
                        d -= &(p * total);
                    }
                    acc(&mut grads, *x, dx);
                }
                Op::Nll(logp, targets) => {
                    let mut d = Array2::zeros(self.value(*logp).raw_dim());
                    let w = g[[0, 0]] / targets.len() as f64;
                    for &r in targets {
                        d[[r, 0]] -= w;
                    }
                    acc(&mut grads, *logp, d);
                }
            }
            grads[i] = Some(g);
        }
        grads
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::Graph;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn layout(g: &Graph) -> Arc<BatchLayout> {
        Arc::new(BatchLayout::repeated(Adjacency::from_graph(g), 1))
    }

    /// Central-difference gradient of `f` at `x`.
    fn numeric(x: &Array2<f64>, f: impl Fn(&Array2<f64>) -> f64) -> Array2<f64> {
        let h = 1e-6;
        let mut g = Array2::zeros(x.raw_dim());
        for idx in ndarray::indices(x.dim()) {
            let mut p = x.clone();
            p[idx] += h;
            let mut m = x.clone();
            m[idx] -= h;
            g[idx] = (f(&p) - f(&m)) / (2.0 * h);
        }
        g
    }

    #[test]
    fn aggregate_sums_neighbours() {
        let g = Graph::from_index_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut t = Tape::new();
        let h = t.leaf(array![[1.0, 2.0], [10.0, 20.0], [100.0, 200.0]]);
        let a = t.aggregate(h, &layout(&g));
        assert_eq!(t.value(a), &array![[10.0, 20.0], [101.0, 202.0], [10.0, 20.0]]);
    }

    #[test]
    fn prelu_negative_side() {
        let mut t = Tape::new();
        let x = t.leaf(array![[-1.0, 2.0]]);
        let a = t.leaf(array![[0.25]]);
        let y = t.prelu(x, a);
        assert_eq!(t.value(y), &array![[-0.25, 2.0]]);
    }

    #[test]
    fn batch_norm_output_moments() {
        let mut t = Tape::new();
        let x = t.leaf(array![[1.0, -3.0], [2.0, 0.5], [4.0, 7.0], [-2.0, 1.0], [0.3, 0.2]]);
        let gamma = t.leaf(array![[2.0, 0.5]]);
        let beta = t.leaf(array![[1.0, -1.0]]);
        let (y, stats) = t.batch_norm(x, gamma, beta);
        let y = t.value(y);
        for (c, (s, b)) in [(2.0, 1.0), (0.5, -1.0)].into_iter().enumerate() {
            let col = y.column(c);
            let mean = col.mean().unwrap();
            let var = col.mapv(|z| (z - mean).powi(2)).mean().unwrap();
            assert_relative_eq!(mean, b, epsilon = 1e-12);
            assert_relative_eq!(var, s * s, max_relative = 1e-4);
        }
        assert_relative_eq!(stats.mean[0], 1.06, epsilon = 1e-12);
    }

    #[test]
    fn segment_log_softmax_normalizes_each_graph() {
        let l = Arc::new(BatchLayout {
            segments: vec![
                Segment { offset: 0, size: 2, graph: 0 },
                Segment { offset: 2, size: 3, graph: 0 },
            ],
            adj: vec![],
        });
        let mut t = Tape::new();
        let x = t.leaf(array![[1.0], [1.0], [0.0], [5.0], [-3.0]]);
        let y = t.segment_log_softmax(x, &l);
        let y = t.value(y);
        assert_relative_eq!(y[[0, 0]], -(2.0f64).ln(), epsilon = 1e-15);
        let s: f64 = (2..5).map(|r| y[[r, 0]].exp()).sum();
        assert_relative_eq!(s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn nll_hand_values() {
        // logits 1, 2, 3 with target 2: loss = ln(e + e^2 + e^3) - 3
        let g = Graph::from_index_edges(3, &[]).unwrap();
        let mut t = Tape::new();
        let x = t.leaf(array![[1.0], [2.0], [3.0]]);
        let lp = t.segment_log_softmax(x, &layout(&g));
        let loss = t.nll(lp, vec![2]);
        let e = std::f64::consts::E;
        let want = (e + e * e + e * e * e).ln() - 3.0;
        assert_relative_eq!(t.value(loss)[[0, 0]], want, epsilon = 1e-12);
        assert_relative_eq!(want, 0.40760596444, epsilon = 1e-10);
    }

    /// Small network touching every op, evaluated from scratch for finite
    /// differences.
    fn every_op(x0: &Array2<f64>, w: &Array2<f64>, gamma: &Array2<f64>, frozen: bool) -> (Tape, Var, Var, Var, Var) {
        let g = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let l = Arc::new(BatchLayout::repeated(Adjacency::from_graph(&g), 2));
        let mut t = Tape::new();
        let x = t.leaf(x0.clone());
        let wv = t.leaf(w.clone());
        let b = t.leaf(array![[0.1, -0.2]]);
        let gm = t.leaf(gamma.clone());
        let bt = t.leaf(array![[0.05, 0.3]]);
        let a = t.leaf(array![[0.2]]);
        let h = t.matmul(x, wv);
        let agg = t.aggregate(h, &l);
        let h = t.add(h, agg);
        let h = t.add_row(h, b);
        let h = if frozen {
            t.batch_norm_frozen(h, gm, bt, &array![[0.3, -0.1]], &array![[1.5, 0.7]])
        } else {
            t.batch_norm(h, gm, bt).0
        };
        let h = t.prelu(h, a);
        let mask = Array2::from_shape_fn(h_dim(&t, h), |(r, c)| if (r + c) % 3 == 0 { 0.0 } else { 1.5 });
        let h = t.scale(h, mask);
        let h = t.concat(h, x);
        let ones = t.leaf(array![[1.0], [-0.5], [0.7], [0.2]]);
        let s = t.matmul(h, ones);
        let lp = t.segment_log_softmax(s, &l);
        let loss = t.nll(lp, vec![1, 6]);
        (t, loss, x, wv, gm)
    }

    fn h_dim(t: &Tape, v: Var) -> (usize, usize) {
        t.value(v).dim()
    }

    #[test]
    fn backward_matches_finite_differences() {
        let x0 = Array2::from_shape_fn((8, 2), |(r, c)| ((r * 7 + c * 3) % 5) as f64 * 0.3 - 0.4);
        let w = array![[0.5, -0.3], [0.2, 0.8]];
        let gamma = array![[1.2, 0.7]];
        for frozen in [false, true] {
            let (t, loss, xv, wv, gv) = every_op(&x0, &w, &gamma, frozen);
            let grads = t.backward(loss);
            let f_w = |p: &Array2<f64>| {
                let (t, l, ..) = every_op(&x0, p, &gamma, frozen);
                t.value(l)[[0, 0]]
            };
            let f_g = |p: &Array2<f64>| {
                let (t, l, ..) = every_op(&x0, &w, p, frozen);
                t.value(l)[[0, 0]]
            };
            let f_x = |p: &Array2<f64>| {
                let (t, l, ..) = every_op(p, &w, &gamma, frozen);
                t.value(l)[[0, 0]]
            };
            for (var, num) in [(wv, numeric(&w, f_w)), (gv, numeric(&gamma, f_g)), (xv, numeric(&x0, f_x))] {
                let an = grads[var.0].as_ref().unwrap();
                for (a, n) in an.iter().zip(num.iter()) {
                    assert!((a - n).abs() <= 1e-6 * (1.0 + a.abs()), "frozen={frozen}: {a} vs {n}");
                }
            }
        }
    }
}
