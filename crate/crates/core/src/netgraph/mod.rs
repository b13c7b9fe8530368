//! Static undirected networks and the topology measures used throughout the
//! crate.
//!
//! A [`Graph`] is immutable once built. Nodes carry external labels (any
//! whitespace-free token from the edge list) mapped to dense indices
//! `0..N` in order of first appearance.

mod centrality;
mod features;

pub use centrality::{
    betweenness_centrality, closeness_centrality, clustering_coefficient, connected_components,
    eccentricities, graph_stats, jordan_center, shortest_path_lengths, TopologyStats, UNREACHABLE,
};
pub use features::node_feature_augmentation;

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Option<Vec<f64>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from dense-index edges. Duplicate undirected edges
    /// collapse to the first occurrence.
    pub fn from_edges(labels: Vec<String>, edges: &[(usize, usize, f64)], weighted: bool) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Invalid("graph has no nodes".into()));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate node label {l:?}")));
            }
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut edge_count = 0;
        for &(u, v, w) in edges {
            if u >= n {
                return Err(Error::NodeOutOfRange(u));
            }
            if v >= n {
                return Err(Error::NodeOutOfRange(v));
            }
            if u == v {
                return Err(Error::Invalid(format!("self-loop on node {:?}", labels[u])));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Invalid(format!("edge weight must be positive and finite, got {w}")));
            }
            if seen.insert((u.min(v), u.max(v))) {
                adj[u].push((v, w));
                adj[v].push((u, w));
                edge_count += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * edge_count);
        let mut ws = Vec::with_capacity(2 * edge_count);
        offsets.push(0);
        for list in &mut adj {
            list.sort_by_key(|&(t, _)| t);
            for &(t, w) in list.iter() {
                targets.push(t);
                ws.push(w);
            }
            offsets.push(targets.len());
        }
        Ok(Self {
            labels,
            index,
            offsets,
            targets,
            weights: weighted.then_some(ws),
            edge_count,
        })
    }

    /// Unweighted graph on nodes labelled `0..n`.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let edges: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_edges(labels, &edges, false)
    }

    /// Parses edge-list text: one `u v` or `u v w` per line, `#` starts a
    /// comment line.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut weighted = false;
        let mut intern = |tok: &str, labels: &mut Vec<String>| -> usize {
            if let Some(&i) = index.get(tok) {
                return i;
            }
            let i = labels.len();
            labels.push(tok.to_string());
            index.insert(tok.to_string(), i);
            i
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let line = lineno + 1;
            let w = match toks.len() {
                2 => 1.0,
                3 => {
                    weighted = true;
                    let w: f64 = toks[2].parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad weight {:?}", toks[2]),
                    })?;
                    if !(w > 0.0) || !w.is_finite() {
                        return Err(Error::Invalid(format!("line {line}: weight must be positive, got {w}")));
                    }
                    w
                }
                k => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected 2 or 3 fields, found {k}"),
                    })
                }
            };
            let u = intern(toks[0], &mut labels);
            let v = intern(toks[1], &mut labels);
            if u == v {
                return Err(Error::Invalid(format!("line {line}: self-loop on {:?}", toks[0])));
            }
            edges.push((u, v, w));
        }
        if labels.is_empty() {
            return Err(Error::Invalid("edge list contains no nodes".into()));
        }
        Self::from_edges(labels, &edges, weighted)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Weights parallel to [`Graph::neighbors`]; `None` for unweighted graphs.
    #[inline]
    pub fn neighbor_weights(&self, v: usize) -> Option<&[f64]> {
        self.weights.as_ref().map(|w| &w[self.offsets[v]..self.offsets[v + 1]])
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange(v))
        }
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            let ws = self.neighbor_weights(u);
            self.neighbors(u)
                .iter()
                .enumerate()
                .filter(move |&(_, &v)| u < v)
                .map(move |(k, &v)| (u, v, ws.map_or(1.0, |w| w[k])))
        })
    }

    /// SHA-256 over labels, edges and weights; identifies the graph in
    /// persisted datasets and models.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.node_count() as u64).to_le_bytes());
        for l in &self.labels {
            h.update((l.len() as u64).to_le_bytes());
            h.update(l.as_bytes());
        }
        h.update([self.is_weighted() as u8]);
        for (u, v, w) in self.edges() {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
            h.update(w.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn is_connected(&self) -> bool {
        connected_components(self) == 1
    }

    /// Errors unless the graph is a single connected component.
    pub fn require_connected(&self) -> Result<()> {
        match connected_components(self) {
            1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }

    /// Subgraph induced by `nodes` (deduplicated, kept in ascending order).
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Subgraph> {
        if nodes.is_empty() {
            return Err(Error::Invalid("induced subgraph of an empty node set".into()));
        }
        let mut to_parent: Vec<usize> = nodes.to_vec();
        to_parent.sort_unstable();
        to_parent.dedup();
        for &v in &to_parent {
            self.check_node(v)?;
        }
        let mut from_parent = vec![None; self.node_count()];
        for (i, &v) in to_parent.iter().enumerate() {
            from_parent[v] = Some(i);
        }
        let labels = to_parent.iter().map(|&v| self.labels[v].clone()).collect();
        let mut edges = Vec::new();
        for (i, &v) in to_parent.iter().enumerate() {
            let ws = self.neighbor_weights(v);
            for (k, &u) in self.neighbors(v).iter().enumerate() {
                if let Some(j) = from_parent[u] {
                    if i < j {
                        edges.push((i, j, ws.map_or(1.0, |w| w[k])));
                    }
                }
            }
        }
        let graph = Graph::from_edges(labels, &edges, self.is_weighted())?;
        Ok(Subgraph {
            graph,
            to_parent,
            from_parent,
        })
    }
}

/// An induced subgraph together with index maps to and from its parent.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: Graph,
    pub to_parent: Vec<usize>,
    pub from_parent: Vec<Option<usize>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_from_text() {
        let g = Graph::parse_edge_list("0 1\n1 2").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(!g.is_weighted());
    }

    #[test]
    fn duplicate_undirected_edge_collapses() {
        let g = Graph::parse_edge_list("a b\nb a").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!(g.index_of("a"), Some(0));
        assert_eq!(g.index_of("b"), Some(1));
    }

    #[test]
    fn comments_and_weights() {
        let g = Graph::parse_edge_list("# header\nx y 2.5\ny z\n").unwrap();
        assert!(g.is_weighted());
        assert_eq!(g.neighbor_weights(1).unwrap(), &[2.5, 1.0]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match Graph::parse_edge_list("0 1\n\n1 2 3 4") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Graph::parse_edge_list("0 1 abc"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn nonpositive_weight_rejected() {
        assert!(matches!(Graph::parse_edge_list("0 1 0"), Err(Error::Invalid(_))));
        assert!(matches!(Graph::parse_edge_list("0 1 -2"), Err(Error::Invalid(_))));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(Graph::parse_edge_list("# nothing\n"), Err(Error::Invalid(_))));
        assert!(matches!(Graph::parse_edge_list("0 0"), Err(Error::Invalid(_))));
    }

    #[test]
    fn induced_subgraph_maps() {
        let g = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let s = g.induced_subgraph(&[0, 2]).unwrap();
        assert_eq!(s.graph.node_count(), 2);
        assert_eq!(s.graph.edge_count(), 0);
        assert_eq!(s.to_parent, vec![0, 2]);
        assert_eq!(s.from_parent, vec![Some(0), None, Some(1), None]);

        let full = g.induced_subgraph(&[3, 2, 1, 0]).unwrap();
        assert_eq!(full.graph.edge_count(), 3);
        assert!(g.induced_subgraph(&[]).is_err());
        assert!(g.induced_subgraph(&[7]).is_err());
    }

    #[test]
    fn content_hash_depends_on_edges() {
        let a = Graph::from_index_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let b = Graph::from_index_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let a2 = Graph::parse_edge_list("1 2\n0 1").unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash().len(), 64);
        // labels are part of the identity
        assert_ne!(a.content_hash(), a2.content_hash());
    }
}
