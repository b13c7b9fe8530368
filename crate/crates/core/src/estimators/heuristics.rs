use rand::seq::SliceRandom;

use super::SourceDistribution;
use crate::epidemics::Snapshot;
use crate::error::{Error, Result};
use crate::netgraph::{betweenness_centrality, connected_components, eccentricities, Graph, Subgraph};
use crate::rng::rng_from_seed;

/// Uniform over the infected subgraph. Ties among the infected nodes are
/// broken by a seeded random permutation, so the induced ranking is a
/// uniformly random order.
pub fn random_estimator(snapshot: &Snapshot, seed: u64) -> Result<SourceDistribution> {
    let infected = snapshot.non_susceptible();
    if infected.is_empty() {
        return Err(Error::Invalid("snapshot has no infected node".into()));
    }
    let n = snapshot.node_count();
    let p = 1.0 / infected.len() as f64;
    let mut probs = vec![0.0; n];
    for &v in &infected {
        probs[v] = p;
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut rng_from_seed(seed));
    Ok(SourceDistribution::from_weights(probs)?.with_tie_order(order))
}

fn infected_subgraph(g: &Graph, snapshot: &Snapshot) -> Result<Subgraph> {
    if snapshot.node_count() != g.node_count() {
        return Err(Error::Shape(format!(
            "snapshot has {} nodes, graph has {}",
            snapshot.node_count(),
            g.node_count()
        )));
    }
    let infected = snapshot.non_susceptible();
    if infected.is_empty() {
        return Err(Error::Invalid("snapshot has no infected node".into()));
    }
    g.induced_subgraph(&infected)
}

/// Restricts a subgraph to its largest connected component (lowest index
/// wins ties). Outbreaks simulated from one source are always connected;
/// this only matters for externally observed snapshots.
fn largest_component(sub: Subgraph) -> Result<Subgraph> {
    if connected_components(&sub.graph) == 1 {
        return Ok(sub);
    }
    let n = sub.graph.node_count();
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut stack = vec![s];
        comp[s] = id;
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &u in sub.graph.neighbors(v) {
                if comp[u] == usize::MAX {
                    comp[u] = id;
                    stack.push(u);
                }
            }
        }
        sizes.push(size);
    }
    let best = (0..sizes.len()).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b });
    let keep: Vec<usize> = (0..n).filter(|&v| comp[v] == best).map(|v| sub.to_parent[v]).collect();
    let parent_n = sub.from_parent.len();
    // rebuild against the parent index space
    let mut from_parent = vec![None; parent_n];
    for (i, &p) in keep.iter().enumerate() {
        from_parent[p] = Some(i);
    }
    let local: Vec<usize> = (0..n).filter(|&v| comp[v] == best).collect();
    let inner = sub.graph.induced_subgraph(&local)?;
    Ok(Subgraph {
        graph: inner.graph,
        to_parent: keep,
        from_parent,
    })
}

/// Susceptible nodes score negative infinity; infected nodes left outside
/// the scored component sit just above them.
fn scores_on_subgraph(snapshot: &Snapshot, sub: &Subgraph, local: &[f64]) -> SourceDistribution {
    let mut scores: Vec<f64> = snapshot
        .states
        .iter()
        .map(|s| if s.is_susceptible() { f64::NEG_INFINITY } else { f64::MIN })
        .collect();
    for (i, &p) in sub.to_parent.iter().enumerate() {
        scores[p] = local[i];
    }
    SourceDistribution::rank_scores(scores)
}

/// Jordan center of the infected subgraph: score is minus the eccentricity.
pub fn jordan_estimator(g: &Graph, snapshot: &Snapshot) -> Result<SourceDistribution> {
    let sub = largest_component(infected_subgraph(g, snapshot)?)?;
    let ecc: Vec<f64> = eccentricities(&sub.graph)?.into_iter().map(|e| -(e as f64)).collect();
    Ok(scores_on_subgraph(snapshot, &sub, &ecc))
}

/// Betweenness centrality within the infected subgraph.
pub fn betweenness_estimator(g: &Graph, snapshot: &Snapshot) -> Result<SourceDistribution> {
    let sub = largest_component(infected_subgraph(g, snapshot)?)?;
    let bc = betweenness_centrality(&sub.graph);
    Ok(scores_on_subgraph(snapshot, &sub, &bc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(code: &str) -> Snapshot {
        Snapshot::from_code_string(code, 1.0).unwrap()
    }

    #[test]
    fn random_uniform_over_infected() {
        let d = random_estimator(&snap("SISSS"), 1).unwrap();
        assert_eq!(d.probs().unwrap()[1], 1.0);
        assert_eq!(d.map_estimate(), 1);
        let d = random_estimator(&snap("IRSIR"), 1).unwrap();
        let p = d.probs().unwrap();
        assert_eq!(p, &[0.25, 0.25, 0.0, 0.25, 0.25]);
        assert_eq!(d.rank_of(2), 5);
        assert!(random_estimator(&snap("SSS"), 0).is_err());
    }

    #[test]
    fn random_ranking_varies_with_seed() {
        let s = snap("IIIIIIII");
        let maps: std::collections::HashSet<usize> =
            (0..64).map(|k| random_estimator(&s, k).unwrap().map_estimate()).collect();
        assert!(maps.len() > 4);
    }

    #[test]
    fn jordan_on_infected_path() {
        let g = Graph::from_index_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let d = jordan_estimator(&g, &snap("IRISS")).unwrap();
        assert_eq!(d.map_estimate(), 1);
        assert_eq!(d.rank_of(3), 4);
        let d = jordan_estimator(&g, &snap("SSSIS")).unwrap();
        assert_eq!(d.map_estimate(), 3);
    }

    #[test]
    fn betweenness_on_infected_star_and_path() {
        let star = Graph::from_index_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(betweenness_estimator(&star, &snap("IIIIS")).unwrap().map_estimate(), 0);
        let g = Graph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let d = betweenness_estimator(&g, &snap("IIIS")).unwrap();
        assert_eq!(d.map_estimate(), 1);
        // susceptible node never outranks an infected one
        assert_eq!(d.rank_of(3), 4);
    }

    #[test]
    fn disconnected_snapshot_uses_largest_component() {
        let g = Graph::from_index_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let d = jordan_estimator(&g, &snap("IISIII")).unwrap();
        assert_eq!(d.map_estimate(), 4);
        assert_eq!(d.scores()[0], f64::MIN);
        assert_eq!(d.rank_of(2), 6);
    }
}
