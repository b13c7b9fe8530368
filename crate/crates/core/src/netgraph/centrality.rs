use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::Result;

/// Distance marker for nodes not reachable from the BFS root.
pub const UNREACHABLE: usize = usize::MAX;

/// Hop distances from `source`, ignoring weights.
pub fn shortest_path_lengths(g: &Graph, source: usize) -> Result<Vec<usize>> {
    g.check_node(source)?;
    let mut dist = vec![UNREACHABLE; g.node_count()];
    bfs_into(g, source, &mut dist, &mut VecDeque::new());
    Ok(dist)
}

fn bfs_into(g: &Graph, source: usize, dist: &mut [usize], queue: &mut VecDeque<usize>) {
    dist.fill(UNREACHABLE);
    dist[source] = 0;
    queue.clear();
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let d = dist[v] + 1;
        for &u in g.neighbors(v) {
            if dist[u] == UNREACHABLE {
                dist[u] = d;
                queue.push_back(u);
            }
        }
    }
}

pub fn connected_components(g: &Graph) -> usize {
    let n = g.node_count();
    let mut comp = vec![false; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if comp[s] {
            continue;
        }
        count += 1;
        comp[s] = true;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &u in g.neighbors(v) {
                if !comp[u] {
                    comp[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    count
}

/// Unnormalized shortest-path betweenness (Brandes), endpoints excluded.
/// Each unordered pair contributes once.
pub fn betweenness_centrality(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut cb = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![UNREACHABLE; n];
    let mut delta = vec![0.0; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        sigma.fill(0.0);
        dist.fill(UNREACHABLE);
        delta.fill(0.0);
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        // predecessors are recovered from distances instead of being stored
        for &w in order.iter().rev() {
            for &v in g.neighbors(w) {
                if dist[v] != UNREACHABLE && dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    for c in &mut cb {
        *c /= 2.0;
    }
    cb
}

/// `(N-1) / sum of distances` per node; zero for isolated nodes.
/// Assumes a connected graph.
pub fn closeness_centrality(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    (0..n)
        .map(|v| {
            bfs_into(g, v, &mut dist, &mut queue);
            let total: usize = dist.iter().filter(|&&d| d != UNREACHABLE).sum();
            if total == 0 {
                0.0
            } else {
                (n - 1) as f64 / total as f64
            }
        })
        .collect()
}

pub fn clustering_coefficient(g: &Graph, v: usize) -> f64 {
    let nb = g.neighbors(v);
    let k = nb.len();
    if k < 2 {
        return 0.0;
    }
    let mut tri = 0usize;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if g.has_edge(a, b) {
                tri += 1;
            }
        }
    }
    tri as f64 / (k * (k - 1) / 2) as f64
}

/// Maximum BFS distance from each node. Errors on disconnected graphs.
pub fn eccentricities(g: &Graph) -> Result<Vec<usize>> {
    g.require_connected()?;
    let n = g.node_count();
    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    Ok((0..n)
        .map(|v| {
            bfs_into(g, v, &mut dist, &mut queue);
            dist.iter().copied().max().unwrap_or(0)
        })
        .collect())
}

/// All nodes of minimum eccentricity, ascending.
pub fn jordan_center(g: &Graph) -> Result<Vec<usize>> {
    let ecc = eccentricities(g)?;
    let best = ecc.iter().copied().min().unwrap_or(0);
    Ok((0..g.node_count()).filter(|&v| ecc[v] == best).collect())
}

/// Network summary with the usual column set: node and edge counts,
/// average degree, average shortest path, diameter, average clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyStats {
    #[serde(rename = "|V|")]
    pub node_count: usize,
    #[serde(rename = "|E|")]
    pub edge_count: usize,
    #[serde(rename = "<k>")]
    pub avg_degree: f64,
    #[serde(rename = "<l>")]
    pub avg_shortest_path: f64,
    #[serde(rename = "diam(G)")]
    pub diameter: usize,
    #[serde(rename = "C")]
    pub avg_clustering: f64,
}

pub fn graph_stats(g: &Graph) -> Result<TopologyStats> {
    g.require_connected()?;
    let n = g.node_count();
    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    let mut total = 0usize;
    let mut diameter = 0usize;
    for v in 0..n {
        bfs_into(g, v, &mut dist, &mut queue);
        for &d in &dist {
            total += d;
            diameter = diameter.max(d);
        }
    }
    let pairs = n * (n.saturating_sub(1));
    let avg_shortest_path = if pairs == 0 { 0.0 } else { total as f64 / pairs as f64 };
    let avg_clustering = (0..n).map(|v| clustering_coefficient(g, v)).sum::<f64>() / n as f64;
    Ok(TopologyStats {
        node_count: n,
        edge_count: g.edge_count(),
        avg_degree: 2.0 * g.edge_count() as f64 / n as f64,
        avg_shortest_path,
        diameter,
        avg_clustering,
    })
}

impl std::fmt::Display for TopologyStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "|V|={} |E|={} <k>={:.2} <l>={:.2} diam={} C={:.2}",
            self.node_count, self.edge_count, self.avg_degree, self.avg_shortest_path, self.diameter, self.avg_clustering
        )
    }
}
