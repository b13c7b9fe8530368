use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EpidemicParams, NodeState, Simulator, Snapshot};
use crate::error::{Error, Result};
use crate::netgraph::Graph;
use crate::rng::{derive_seed, rng_from_seed};

/// How the elapsed time between outbreak start and observation is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DurationSpec {
    /// Every record observed after exactly this duration.
    Fixed(f64),
    /// Duration drawn uniformly from `(0, upper]` per record.
    UniformUpTo(f64),
}

impl DurationSpec {
    /// The uncertain-duration setting: uniform on `(0, 4 t_star]`.
    pub fn uncertain(t_star: f64) -> Self {
        DurationSpec::UniformUpTo(4.0 * t_star)
    }

    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            DurationSpec::Fixed(t) | DurationSpec::UniformUpTo(t) => t,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Invalid(format!("duration must be positive, got {v}")))
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            DurationSpec::Fixed(t) => t,
            DurationSpec::UniformUpTo(hi) => {
                let u: f64 = rng.gen();
                hi * (1.0 - u)
            }
        }
    }
}

/// One labelled outbreak: the true source and the snapshot it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutbreakRecord {
    pub source: usize,
    pub snapshot: Snapshot,
    pub seed: u64,
}

impl OutbreakRecord {
    pub fn duration(&self) -> f64 {
        self.snapshot.time
    }
}

/// Balanced collection of outbreaks on one graph: `n_per_source` records for
/// every node as source, stored source-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub graph_id: String,
    pub node_count: usize,
    pub params: EpidemicParams,
    pub duration: DurationSpec,
    pub n_per_source: usize,
    pub master_seed: u64,
    pub records: Vec<OutbreakRecord>,
}

/// Seed for replicate `i` from `source`. It does not depend on the total
/// replicate count, so a smaller dataset is a per-source prefix of a larger
/// one built from the same master seed.
pub fn record_seed(master_seed: u64, source: usize, i: usize) -> u64 {
    derive_seed(master_seed, ((source as u64) << 32) | i as u64)
}

/// Rebuilds a single record from its seed.
pub fn simulate_record(
    sim: &mut Simulator<'_>,
    params: &EpidemicParams,
    duration: &DurationSpec,
    source: usize,
    seed: u64,
) -> OutbreakRecord {
    let mut rng = rng_from_seed(seed);
    let t = duration.draw(&mut rng);
    let snapshot = sim.run(params, source, t, &mut rng);
    OutbreakRecord { source, snapshot, seed }
}

pub fn generate_dataset(
    g: &Graph,
    params: &EpidemicParams,
    n_per_source: usize,
    duration: DurationSpec,
    master_seed: u64,
) -> Result<SimDataset> {
    params.validate()?;
    duration.validate()?;
    if n_per_source == 0 {
        return Err(Error::Invalid("n_per_source must be at least 1".into()));
    }
    let n = g.node_count();
    let records: Vec<OutbreakRecord> = (0..n * n_per_source)
        .into_par_iter()
        .map_init(
            || Simulator::new(g),
            |sim, k| {
                let (q, i) = (k / n_per_source, k % n_per_source);
                simulate_record(sim, params, &duration, q, record_seed(master_seed, q, i))
            },
        )
        .collect();
    Ok(SimDataset {
        graph_id: g.content_hash(),
        node_count: n,
        params: *params,
        duration,
        n_per_source,
        master_seed,
        records,
    })
}

/// Mean outbreak composition for records sharing (or binned by) duration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DurationSummary {
    pub duration: f64,
    pub records: usize,
    pub mean_infectious_fraction: f64,
    pub mean_recovered_fraction: f64,
    pub mean_infected_fraction: f64,
}

impl SimDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records whose true source is `q`.
    pub fn records_for(&self, q: usize) -> &[OutbreakRecord] {
        &self.records[q * self.n_per_source..(q + 1) * self.n_per_source]
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        let expected = g.content_hash();
        if self.graph_id != expected {
            return Err(Error::HashMismatch {
                found: self.graph_id.clone(),
                expected,
            });
        }
        Ok(())
    }

    /// Structural balance check: source-major layout with equal counts.
    pub fn is_balanced(&self) -> bool {
        self.records.len() == self.node_count * self.n_per_source
            && self
                .records
                .iter()
                .enumerate()
                .all(|(k, r)| r.source == k / self.n_per_source)
    }

    /// First `n` replicates per source, which equals the dataset that
    /// [`generate_dataset`] would produce with `n_per_source = n`.
    pub fn prefix(&self, n: usize) -> Result<SimDataset> {
        if n == 0 || n > self.n_per_source {
            return Err(Error::Invalid(format!(
                "prefix size {n} outside 1..={}",
                self.n_per_source
            )));
        }
        let records = (0..self.node_count)
            .flat_map(|q| self.records_for(q)[..n].iter().cloned())
            .collect();
        Ok(SimDataset {
            n_per_source: n,
            records,
            ..self.clone_header()
        })
    }

    fn clone_header(&self) -> SimDataset {
        SimDataset {
            graph_id: self.graph_id.clone(),
            node_count: self.node_count,
            params: self.params,
            duration: self.duration,
            n_per_source: self.n_per_source,
            master_seed: self.master_seed,
            records: Vec::new(),
        }
    }

    /// Mean state fractions; fixed-duration data gives one row, sampled
    /// durations are grouped into `bins` equal-width bins.
    pub fn summary(&self, bins: usize) -> Vec<DurationSummary> {
        let n = self.node_count as f64;
        let (lo, hi, nb) = match self.duration {
            DurationSpec::Fixed(t) => (t, t, 1),
            DurationSpec::UniformUpTo(h) => (0.0, h, bins.max(1)),
        };
        let mut acc = vec![(0usize, 0.0, 0.0); nb];
        for r in &self.records {
            let b = if nb == 1 {
                0
            } else {
                (((r.duration() - lo) / (hi - lo) * nb as f64) as usize).min(nb - 1)
            };
            acc[b].0 += 1;
            acc[b].1 += r.snapshot.count(NodeState::Infectious) as f64 / n;
            acc[b].2 += r.snapshot.count(NodeState::Recovered) as f64 / n;
        }
        acc.into_iter()
            .enumerate()
            .filter(|(_, a)| a.0 > 0)
            .map(|(b, (count, i, rr))| {
                let c = count as f64;
                let duration = if nb == 1 { hi } else { lo + (b as f64 + 0.5) * (hi - lo) / nb as f64 };
                DurationSummary {
                    duration,
                    records: count,
                    mean_infectious_fraction: i / c,
                    mean_recovered_fraction: rr / c,
                    mean_infected_fraction: (i + rr) / c,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_index_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn balanced_counts() {
        let g = path3();
        let p = EpidemicParams::new(1.0, 1.0).unwrap();
        let ds = generate_dataset(&g, &p, 2, DurationSpec::Fixed(1.0), 3).unwrap();
        assert_eq!(ds.len(), 6);
        assert!(ds.is_balanced());
        for q in 0..3 {
            assert_eq!(ds.records_for(q).len(), 2);
            assert!(ds.records_for(q).iter().all(|r| r.source == q));
            assert!(ds.records_for(q).iter().all(|r| !r.snapshot.state(q).is_susceptible()));
        }
        assert!(generate_dataset(&g, &p, 0, DurationSpec::Fixed(1.0), 3).is_err());
    }

    #[test]
    fn records_reproducible_in_isolation() {
        let g = path3();
        let p = EpidemicParams::new(2.0, 1.0).unwrap();
        let spec = DurationSpec::uncertain(0.5);
        let ds = generate_dataset(&g, &p, 4, spec, 99).unwrap();
        let mut sim = Simulator::new(&g);
        for r in &ds.records {
            assert_eq!(&simulate_record(&mut sim, &p, &spec, r.source, r.seed), r);
        }
    }

    #[test]
    fn smaller_dataset_is_prefix() {
        let g = path3();
        let p = EpidemicParams::new(1.0, 1.0).unwrap();
        let big = generate_dataset(&g, &p, 10, DurationSpec::Fixed(0.7), 5).unwrap();
        let small = generate_dataset(&g, &p, 3, DurationSpec::Fixed(0.7), 5).unwrap();
        assert_eq!(big.prefix(3).unwrap(), small);
        assert!(big.prefix(11).is_err());
    }

    #[test]
    fn uniform_durations_have_expected_mean() {
        let g = path3();
        let p = EpidemicParams::new(1.0, 1.0).unwrap();
        let t_star = 0.85;
        let ds = generate_dataset(&g, &p, 3400, DurationSpec::uncertain(t_star), 1).unwrap();
        let n = ds.len() as f64;
        let mean = ds.records.iter().map(|r| r.duration()).sum::<f64>() / n;
        let upper = 4.0 * t_star;
        let sd = upper / 12f64.sqrt() / n.sqrt();
        assert!((mean - 2.0 * t_star).abs() < 3.0 * sd, "{mean}");
        assert!(ds.records.iter().all(|r| r.duration() > 0.0 && r.duration() <= upper));
        let rows = ds.summary(5);
        assert_eq!(rows.iter().map(|r| r.records).sum::<usize>(), ds.len());
    }
}
