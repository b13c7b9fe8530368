#![allow(dead_code)]

use rand::Rng;
use sourcedet::epidemics::{EpidemicParams, NodeState};
use sourcedet::netgraph::Graph;

/// First-reaction Gillespie: every enabled reaction (each infectious node's
/// recovery, each infectious-susceptible edge's transmission) draws its own
/// exponential clock; the earliest fires and all clocks are redrawn.
pub fn first_reaction<R: Rng>(g: &Graph, p: &EpidemicParams, source: usize, t_end: f64, rng: &mut R) -> Vec<NodeState> {
    let n = g.node_count();
    let mut state = vec![NodeState::Susceptible; n];
    state[source] = NodeState::Infectious;
    let mut t = 0.0;
    loop {
        let mut best: Option<(f64, usize, NodeState)> = None;
        let mut offer = |dt: f64, v: usize, s: NodeState| {
            if best.map_or(true, |(b, _, _)| dt < b) {
                best = Some((dt, v, s));
            }
        };
        for v in 0..n {
            if state[v] != NodeState::Infectious {
                continue;
            }
            if p.mu > 0.0 {
                offer(draw(rng, p.mu), v, NodeState::Recovered);
            }
            let w = g.neighbor_weights(v);
            for (k, &u) in g.neighbors(v).iter().enumerate() {
                if state[u] == NodeState::Susceptible {
                    offer(draw(rng, p.beta * w.map_or(1.0, |w| w[k])), u, NodeState::Infectious);
                }
            }
        }
        match best {
            Some((dt, v, s)) if t + dt <= t_end => {
                t += dt;
                state[v] = s;
            }
            _ => return state,
        }
    }
}

fn draw<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

/// Connected graphs on up to four nodes, one per isomorphism class.
pub fn small_connected_graphs() -> Vec<(&'static str, Graph)> {
    let list: [(&str, usize, &[(usize, usize)]); 10] = [
        ("K1", 1, &[]),
        ("K2", 2, &[(0, 1)]),
        ("P3", 3, &[(0, 1), (1, 2)]),
        ("K3", 3, &[(0, 1), (1, 2), (2, 0)]),
        ("P4", 4, &[(0, 1), (1, 2), (2, 3)]),
        ("star", 4, &[(0, 1), (0, 2), (0, 3)]),
        ("C4", 4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
        ("paw", 4, &[(0, 1), (1, 2), (2, 0), (2, 3)]),
        ("diamond", 4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
        ("K4", 4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    ];
    list.iter()
        .map(|(name, n, e)| (*name, Graph::from_index_edges(*n, e).unwrap()))
        .collect()
}
