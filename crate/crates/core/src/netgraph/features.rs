use super::{betweenness_centrality, closeness_centrality, clustering_coefficient, Graph};

/// Per-node structural features `[degree, betweenness, closeness, clustering]`,
/// each column min-max scaled to `[0, 1]`. A constant column maps to zeros.
pub fn node_feature_augmentation(g: &Graph) -> Vec<[f64; 4]> {
    let n = g.node_count();
    let columns = [
        (0..n).map(|v| g.degree(v) as f64).collect::<Vec<_>>(),
        betweenness_centrality(g),
        closeness_centrality(g),
        (0..n).map(|v| clustering_coefficient(g, v)).collect(),
    ];
    let scaled: Vec<Vec<f64>> = columns.iter().map(|c| min_max(c)).collect();
    (0..n)
        .map(|v| [scaled[0][v], scaled[1][v], scaled[2][v], scaled[3][v]])
        .collect()
}

fn min_max(col: &[f64]) -> Vec<f64> {
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 1e-15) {
        return vec![0.0; col.len()];
    }
    col.iter().map(|x| (x - lo) / span).collect()
}
