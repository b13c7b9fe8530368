use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EpidemicParams, NodeState, Snapshot};
use crate::netgraph::Graph;
use crate::rng::{exponential, rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy)]
struct Infection {
    time: f64,
    node: usize,
}

impl PartialEq for Infection {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Infection {}

impl PartialOrd for Infection {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Infection {
    // reversed so that BinaryHeap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Event-driven SIR engine with reusable buffers for one graph.
///
/// Only infection events enter the heap. When a node is popped it draws its
/// recovery time, then one candidate infection time per neighbour; a
/// candidate is scheduled only if it precedes the infector's recovery, the
/// neighbour's current tentative infection, and the observation time.
pub struct Simulator<'g> {
    graph: &'g Graph,
    infection: Vec<f64>,
    recovery: Vec<f64>,
    done: Vec<bool>,
    heap: BinaryHeap<Infection>,
}

impl<'g> Simulator<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        let n = graph.node_count();
        Self {
            graph,
            infection: vec![f64::INFINITY; n],
            recovery: vec![f64::INFINITY; n],
            done: vec![false; n],
            heap: BinaryHeap::with_capacity(n),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Runs one outbreak from `source` and returns the node states at `t_end`.
    pub fn run(&mut self, params: &EpidemicParams, source: usize, t_end: f64, rng: &mut SimRng) -> Snapshot {
        let g = self.graph;
        self.infection.fill(f64::INFINITY);
        self.recovery.fill(f64::INFINITY);
        self.done.fill(false);
        self.heap.clear();

        self.infection[source] = 0.0;
        self.heap.push(Infection { time: 0.0, node: source });

        while let Some(Infection { time, node: v }) = self.heap.pop() {
            if self.done[v] || time > self.infection[v] {
                continue;
            }
            self.done[v] = true;
            let rec = if params.mu > 0.0 {
                time + exponential(rng, params.mu)
            } else {
                f64::INFINITY
            };
            self.recovery[v] = rec;
            let weights = g.neighbor_weights(v);
            for (k, &u) in g.neighbors(v).iter().enumerate() {
                let rate = params.beta * weights.map_or(1.0, |w| w[k]);
                let cand = time + exponential(rng, rate);
                if cand < rec && cand < self.infection[u] && cand <= t_end {
                    self.infection[u] = cand;
                    self.heap.push(Infection { time: cand, node: u });
                }
            }
        }

        let states = (0..g.node_count())
            .map(|v| {
                if !self.done[v] {
                    NodeState::Susceptible
                } else if self.recovery[v] <= t_end {
                    NodeState::Recovered
                } else {
                    NodeState::Infectious
                }
            })
            .collect();
        Snapshot::new(states, t_end)
    }
}

/// One outbreak from `source`, observed at `t_end`, from a fresh seeded stream.
pub fn simulate(g: &Graph, params: &EpidemicParams, source: usize, t_end: f64, seed: u64) -> Snapshot {
    assert!(source < g.node_count(), "source {source} out of range");
    let mut rng = rng_from_seed(seed);
    Simulator::new(g).run(params, source, t_end, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> Graph {
        Graph::from_edges(vec!["a".into()], &[], false).unwrap()
    }

    #[test]
    fn isolated_node_recovers_eventually() {
        let g = single();
        let p = EpidemicParams::new(1.0, 1.0).unwrap();
        assert_eq!(simulate(&g, &p, 0, 1e-12, 1).states, vec![NodeState::Infectious]);
        assert_eq!(simulate(&g, &p, 0, 1e6, 1).states, vec![NodeState::Recovered]);
    }

    #[test]
    fn degenerate_time_keeps_source_only() {
        let g = Graph::from_index_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let p = EpidemicParams::new(1.0, 1.0).unwrap();
        let s = simulate(&g, &p, 1, 0.0, 9);
        assert_eq!(s.non_susceptible(), vec![1]);
    }

    #[test]
    fn si_never_recovers() {
        let g = Graph::from_index_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let p = EpidemicParams::si(1.0).unwrap();
        for seed in 0..200 {
            let s = simulate(&g, &p, 0, 5.0, seed);
            assert_eq!(s.count(NodeState::Recovered), 0);
        }
        let s = simulate(&g, &p, 0, 1e9, 3);
        assert_eq!(s.count(NodeState::Infectious), 3);
    }

    #[test]
    fn same_seed_same_snapshot() {
        let g = Graph::from_index_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let p = EpidemicParams::new(1.5, 1.0).unwrap();
        for seed in 0..50 {
            assert_eq!(simulate(&g, &p, 2, 1.3, seed), simulate(&g, &p, 2, 1.3, seed));
        }
    }

    #[test]
    fn earlier_observation_only_lags_behind() {
        let g = Graph::from_index_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)]).unwrap();
        let p = EpidemicParams::new(2.0, 1.0).unwrap();
        for seed in 0..300 {
            let late = simulate(&g, &p, 0, 2.0, seed);
            for &t in &[0.1, 0.5, 1.0, 1.99] {
                let early = simulate(&g, &p, 0, t, seed);
                for v in 0..6 {
                    assert!(early.state(v).index() <= late.state(v).index(), "seed {seed} t {t} node {v}");
                }
            }
        }
    }

    #[test]
    fn two_node_race_probability() {
        // P(second node ever infected) = beta / (beta + mu) = 1/2
        let g = Graph::from_index_edges(2, &[(0, 1)]).unwrap();
        let p = EpidemicParams::new(1.0, 1.0).unwrap();
        let mut sim = Simulator::new(&g);
        let n = 100_000;
        let mut rng = rng_from_seed(5);
        let hits = (0..n)
            .filter(|_| !sim.run(&p, 0, 1e6, &mut rng).state(1).is_susceptible())
            .count();
        let phat = hits as f64 / n as f64;
        assert!((phat - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "{phat}");
    }

    #[test]
    fn weights_scale_infection_rate() {
        // SI on a weighted edge: P(infected by t) = 1 - exp(-beta w t)
        let g = Graph::parse_edge_list("a b 3.0").unwrap();
        let p = EpidemicParams::si(0.5).unwrap();
        let t = 0.4;
        let expect = 1.0 - (-0.5f64 * 3.0 * t).exp();
        let n = 100_000;
        let mut sim = Simulator::new(&g);
        let mut rng = rng_from_seed(17);
        let hits = (0..n).filter(|_| !sim.run(&p, 0, t, &mut rng).state(1).is_susceptible()).count();
        let phat = hits as f64 / n as f64;
        let sd = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((phat - expect).abs() < 3.0 * sd, "{phat} vs {expect}");
    }
}
