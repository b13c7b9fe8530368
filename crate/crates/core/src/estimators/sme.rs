use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::SourceDistribution;
use crate::epidemics::{SimDataset, Snapshot};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmeConfig {
    /// Candidate convergence parameters, strictly positive and descending.
    pub a_grid: Vec<f64>,
    pub convergence_tol: f64,
    pub bootstrap_resamples: usize,
}

impl Default for SmeConfig {
    fn default() -> Self {
        Self {
            a_grid: (0..=10).map(|k| 0.5f64.powi(k)).collect(),
            convergence_tol: 0.05,
            bootstrap_resamples: 100,
        }
    }
}

impl SmeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.a_grid.is_empty() {
            return Err(Error::Invalid("a_grid is empty".into()));
        }
        if self.a_grid.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::Invalid("a_grid values must be positive".into()));
        }
        if self.a_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Invalid("a_grid must be strictly descending".into()));
        }
        if self.bootstrap_resamples == 0 {
            return Err(Error::Invalid("bootstrap_resamples must be positive".into()));
        }
        Ok(())
    }
}

/// Jaccard similarity of the non-susceptible node sets; 1 when both are empty.
pub fn jaccard_similarity(s1: &Snapshot, s2: &Snapshot) -> f64 {
    assert_eq!(s1.node_count(), s2.node_count(), "snapshots from different graphs");
    let (mut inter, mut union) = (0usize, 0usize);
    for (a, b) in s1.states.iter().zip(&s2.states) {
        let (a, b) = (!a.is_susceptible(), !b.is_susceptible());
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[inline]
fn log_weight(phi: f64, a: f64) -> f64 {
    -((phi - 1.0) * (phi - 1.0)) / (a * a)
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn bitset(s: &Snapshot, words: usize) -> Vec<u64> {
    let mut b = vec![0u64; words];
    for (v, st) in s.states.iter().enumerate() {
        if !st.is_susceptible() {
            b[v / 64] |= 1 << (v % 64);
        }
    }
    b
}

/// Distinct similarity values observed for one source, with multiplicities.
#[derive(Debug, Clone)]
struct Levels {
    phi: Vec<f64>,
    count: Vec<u32>,
}

impl Levels {
    fn log_likelihood(&self, a: f64, n: f64) -> f64 {
        log_likelihood_counts(&self.phi, self.count.iter().map(|&c| c as f64), a, n)
    }
}

fn log_likelihood_counts(phi: &[f64], counts: impl Iterator<Item = f64> + Clone, a: f64, n: f64) -> f64 {
    let terms = phi
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0.0)
        .map(|(&p, c)| c.ln() + log_weight(p, a));
    log_sum_exp(terms) - n.ln()
}

/// Simulated outbreaks stored as bitsets of non-susceptible nodes, grouped
/// by source, so each query costs one popcount pass per record.
#[derive(Debug, Clone)]
pub struct SmeIndex {
    node_count: usize,
    n_per_source: usize,
    words: usize,
    bits: Vec<u64>,
    sizes: Vec<u32>,
}

impl SmeIndex {
    pub fn new(dataset: &SimDataset) -> Result<Self> {
        if !dataset.is_balanced() || dataset.n_per_source == 0 {
            return Err(Error::Invalid("SME needs a balanced dataset with n > 0".into()));
        }
        let words = dataset.node_count.div_ceil(64).max(1);
        let mut bits = Vec::with_capacity(words * dataset.records.len());
        let mut sizes = Vec::with_capacity(dataset.records.len());
        for q in 0..dataset.node_count {
            for r in dataset.records_for(q) {
                bits.extend(bitset(&r.snapshot, words));
                sizes.push(r.snapshot.infected_count() as u32);
            }
        }
        Ok(Self {
            node_count: dataset.node_count,
            n_per_source: dataset.n_per_source,
            words,
            bits,
            sizes,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn n_per_source(&self) -> usize {
        self.n_per_source
    }

    fn check(&self, snapshot: &Snapshot) -> Result<()> {
        if snapshot.node_count() != self.node_count {
            return Err(Error::Shape(format!(
                "snapshot has {} nodes, dataset has {}",
                snapshot.node_count(),
                self.node_count
            )));
        }
        Ok(())
    }

    /// Similarity levels for each requested source.
    fn levels(&self, snapshot: &Snapshot, sources: &[usize]) -> Vec<Levels> {
        let target = bitset(snapshot, self.words);
        let k = snapshot.infected_count();
        let n1 = self.node_count + 1;
        // intersection is at most k, union at most N
        let mut table = vec![0u32; (k + 1) * n1];
        let mut touched = Vec::new();
        sources
            .iter()
            .map(|&q| {
                let base = q * self.n_per_source;
                for i in base..base + self.n_per_source {
                    let rec = &self.bits[i * self.words..(i + 1) * self.words];
                    let inter: u32 = rec.iter().zip(&target).map(|(x, y)| (x & y).count_ones()).sum();
                    let union = self.sizes[i] as usize + k - inter as usize;
                    let key = inter as usize * n1 + union;
                    if table[key] == 0 {
                        touched.push(key);
                    }
                    table[key] += 1;
                }
                let mut lv = Levels {
                    phi: Vec::with_capacity(touched.len()),
                    count: Vec::with_capacity(touched.len()),
                };
                for &key in &touched {
                    let (inter, union) = (key / n1, key % n1);
                    lv.phi.push(if union == 0 { 1.0 } else { inter as f64 / union as f64 });
                    lv.count.push(table[key]);
                    table[key] = 0;
                }
                touched.clear();
                lv
            })
            .collect()
    }

    /// Log of the likelihood estimate for every source.
    pub fn log_likelihoods(&self, snapshot: &Snapshot, a: f64) -> Result<Vec<f64>> {
        self.check(snapshot)?;
        let all: Vec<usize> = (0..self.node_count).collect();
        let n = self.n_per_source as f64;
        Ok(self.levels(snapshot, &all).iter().map(|l| l.log_likelihood(a, n)).collect())
    }

    /// Picks the convergence parameter; see [`sme_select_a`].
    pub fn select_a(&self, snapshot: &Snapshot, cfg: &SmeConfig, seed: u64) -> Result<f64> {
        Ok(self.fit(snapshot, cfg, seed)?.0)
    }

    fn fit(&self, snapshot: &Snapshot, cfg: &SmeConfig, seed: u64) -> Result<(f64, SourceDistribution)> {
        cfg.validate()?;
        self.check(snapshot)?;
        snapshot.require_outbreak()?;
        let candidates = snapshot.non_susceptible();
        let levels = self.levels(snapshot, &candidates);
        let n = self.n_per_source as f64;

        // Bootstrap resamples of size 2n, drawn once and shared by every a.
        let mut rng = rng_from_seed(seed);
        let draws = 2 * self.n_per_source as u64;
        let resamples: Vec<Vec<Vec<f64>>> = (0..cfg.bootstrap_resamples)
            .map(|_| levels.iter().map(|l| multinomial(&mut rng, draws, &l.count, self.n_per_source)).collect())
            .collect();

        let posterior = |log_l: &[f64]| -> Vec<f64> {
            let z = log_sum_exp(log_l.iter().copied());
            log_l.iter().map(|l| (l - z).exp()).collect()
        };

        let mut chosen = None;
        for &a in &cfg.a_grid {
            let log_l: Vec<f64> = levels.iter().map(|l| l.log_likelihood(a, n)).collect();
            if log_l.iter().all(|l| *l == f64::NEG_INFINITY) {
                continue;
            }
            let post = posterior(&log_l);
            let map = (1..post.len()).fold(0, |b, i| if post[i] > post[b] { i } else { b });
            let mut boot = 0.0;
            let mut used = 0usize;
            for counts in &resamples {
                let log_b: Vec<f64> = levels
                    .iter()
                    .zip(counts)
                    .map(|(l, c)| log_likelihood_counts(&l.phi, c.iter().copied(), a, 2.0 * n))
                    .collect();
                if log_b.iter().all(|l| *l == f64::NEG_INFINITY) {
                    continue;
                }
                boot += (post[map] - posterior(&log_b)[map]).abs();
                used += 1;
            }
            // mean over resamples of the single-resample discrepancy
            if used > 0 && boot / used as f64 <= cfg.convergence_tol {
                chosen = Some((a, log_l));
            }
        }
        let (a, log_l) = match chosen {
            Some(c) => c,
            None => {
                let a = *cfg.a_grid.last().unwrap();
                log::warn!("SME did not converge on the a grid, using a = {a}");
                (a, levels.iter().map(|l| l.log_likelihood(a, n)).collect())
            }
        };
        let mut full = vec![f64::NEG_INFINITY; self.node_count];
        for (&q, l) in candidates.iter().zip(&log_l) {
            full[q] = *l;
        }
        Ok((a, SourceDistribution::from_log_weights(&full, &candidates)?))
    }

    /// Posterior over the snapshot's non-susceptible nodes at the selected a.
    pub fn posterior(&self, snapshot: &Snapshot, cfg: &SmeConfig, seed: u64) -> Result<SourceDistribution> {
        Ok(self.fit(snapshot, cfg, seed)?.1)
    }
}

/// Multinomial counts over categories with weights `count/total`, by
/// sequential binomial splitting.
fn multinomial(rng: &mut crate::rng::SimRng, draws: u64, count: &[u32], total: usize) -> Vec<f64> {
    let mut left_draws = draws;
    let mut left_mass = total as u64;
    count
        .iter()
        .map(|&c| {
            if left_draws == 0 || left_mass == 0 {
                return 0.0;
            }
            let p = (c as f64 / left_mass as f64).min(1.0);
            let k = Binomial::new(left_draws, p).expect("valid binomial").sample(rng);
            left_draws -= k;
            left_mass -= c as u64;
            k as f64
        })
        .collect()
}

/// Likelihood estimate per source, `(1/n) Σ_i exp(-(φ_i - 1)² / a²)`.
pub fn sme_likelihoods(snapshot: &Snapshot, dataset: &SimDataset, a: f64) -> Result<Vec<f64>> {
    if !(a > 0.0) {
        return Err(Error::Invalid(format!("a must be positive, got {a}")));
    }
    Ok(SmeIndex::new(dataset)?
        .log_likelihoods(snapshot, a)?
        .into_iter()
        .map(f64::exp)
        .collect())
}

/// Smallest a on the grid whose n-sample posterior of the MAP source stays
/// within tolerance of its estimate from a size-2n bootstrap resample, the
/// discrepancy being averaged over the configured number of resamples.
/// Falls back to the last grid value (with a warning) when none converges.
pub fn sme_select_a(snapshot: &Snapshot, dataset: &SimDataset, cfg: &SmeConfig, seed: u64) -> Result<f64> {
    SmeIndex::new(dataset)?.select_a(snapshot, cfg, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epidemics::{DurationSpec, EpidemicParams, OutbreakRecord};
    use proptest::prelude::*;

    fn snap(code: &str) -> Snapshot {
        Snapshot::from_code_string(code, 1.0).unwrap()
    }

    /// Dataset with records given per source as code strings.
    fn hand_dataset(per_source: &[&[&str]]) -> SimDataset {
        let n = per_source[0].len();
        let records = per_source
            .iter()
            .enumerate()
            .flat_map(|(q, recs)| {
                recs.iter().map(move |c| OutbreakRecord {
                    source: q,
                    snapshot: snap(c),
                    seed: 0,
                })
            })
            .collect();
        SimDataset {
            graph_id: String::new(),
            node_count: per_source.len(),
            params: EpidemicParams::new(1.0, 1.0).unwrap(),
            duration: DurationSpec::Fixed(1.0),
            n_per_source: n,
            master_seed: 0,
            records,
        }
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard_similarity(&snap("IRS"), &snap("IRS")), 1.0);
        assert_eq!(jaccard_similarity(&snap("IISS"), &snap("SSIR")), 0.0);
        assert_eq!(jaccard_similarity(&snap("IIRS"), &snap("SIRI")), 0.5);
        // I and R are not distinguished
        assert_eq!(jaccard_similarity(&snap("IR"), &snap("RI")), 1.0);
        assert_eq!(jaccard_similarity(&snap("SS"), &snap("SS")), 1.0);
    }

    #[test]
    fn likelihood_closed_forms() {
        let r = "IIS";
        let ds = hand_dataset(&[&[r, r, r, r], &["SSI", "SSI", "SSI", "SSI"], &["IIS", "ISS", "SII", "SSI"]]);
        let l = sme_likelihoods(&snap(r), &ds, 1.0).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-12);
        assert!((l[1] - (-1.0f64).exp()).abs() < 1e-12);
        // similarities 1, 1/2, 1/3, 0 computed by hand
        let want = (1.0 + (-0.25f64).exp() + (-4.0f64 / 9.0).exp() + (-1.0f64).exp()) / 4.0;
        assert!((l[2] - want).abs() < 1e-12);
    }

    #[test]
    fn path_example_with_half_similarities() {
        // r* = {0,1}; records {0,1}, {1}, {0}, {2} give φ = 1, 1/2, 1/2, 0
        let ds = hand_dataset(&[&["IIS", "SIS", "RSS", "SSI"], &["SSI"; 4], &["SSI"; 4]]);
        let l = sme_likelihoods(&snap("IRS"), &ds, 1.0).unwrap();
        let want = (1.0 + 2.0 * (-0.25f64).exp() + (-1.0f64).exp()) / 4.0;
        assert!((l[0] - want).abs() < 1e-12);
    }

    #[test]
    fn tiny_a_keeps_only_exact_matches() {
        let r = "IIRS";
        let ds = hand_dataset(&[
            &[r, "IISS", "IISI", r],
            &["IIII", "IIII", "ISSS", "SIIS"],
            &["IRRS", "IIII", "SSSI", "IIIR"],
            &["SSSI"; 4],
        ]);
        let l = sme_likelihoods(&snap(r), &ds, 1e-6).unwrap();
        assert!((l[0] - 0.5).abs() < 1e-12);
        // {0,1,2} vs the exact set {0,1,2}: I/R differences do not matter
        assert!((l[2] - 0.25).abs() < 1e-12);
        assert!(l[1] <= 1e-9 && l[3] <= 1e-9);
        // posterior mass concentrates on exact-match sources
        let cfg = SmeConfig {
            a_grid: vec![1e-6],
            ..SmeConfig::default()
        };
        let post = SmeIndex::new(&ds).unwrap().posterior(&snap(r), &cfg, 1).unwrap();
        let p = post.probs().unwrap();
        assert!(p[0] + p[2] > 1.0 - 1e-6);
    }

    #[test]
    fn identical_records_converge_at_first_a() {
        let r = "IISS";
        let ds = hand_dataset(&[&[r; 5], &[r; 5], &[r; 5], &[r; 5]]);
        let cfg = SmeConfig::default();
        assert_eq!(sme_select_a(&snap(r), &ds, &cfg, 3).unwrap(), 1.0 / 1024.0);
        // every a converges, so the smallest wins; with a single-value grid it is that value
        let one = SmeConfig {
            a_grid: vec![1.0],
            ..cfg
        };
        assert_eq!(sme_select_a(&snap(r), &ds, &one, 3).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_single_record_falls_back() {
        // one record per source: the bootstrap repeats it, so mismatched
        // evidence leaves a ratio between sources that only a coarse a keeps
        let ds = hand_dataset(&[&["IISS"], &["IIIS"], &["SIIS"], &["SSSI"]]);
        let cfg = SmeConfig {
            a_grid: vec![1.0, 0.5],
            convergence_tol: 0.0,
            bootstrap_resamples: 10,
        };
        let a = sme_select_a(&snap("IIIS"), &ds, &cfg, 0).unwrap();
        assert!(cfg.a_grid.contains(&a));
        // a grid with a non-converging value yields the smallest grid point
        let ds = hand_dataset(&[&["IISS", "SSSI"], &["SSSI", "IIIS"], &["SSSI"; 2], &["SSSI"; 2]]);
        let cfg = SmeConfig {
            a_grid: vec![0.5, 0.25],
            convergence_tol: 1e-12,
            bootstrap_resamples: 50,
        };
        assert_eq!(sme_select_a(&snap("IIIS"), &ds, &cfg, 0).unwrap(), 0.25);
    }

    #[test]
    fn posterior_excludes_susceptible_nodes() {
        let ds = hand_dataset(&[&["IISS", "IIIS"], &["IIIS", "IIII"], &["SIIS", "IIIS"], &["SSSI"; 2]]);
        let post = SmeIndex::new(&ds)
            .unwrap()
            .posterior(&snap("IIIS"), &SmeConfig::default(), 0)
            .unwrap();
        let p = post.probs().unwrap();
        assert_eq!(p[3], 0.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(SmeConfig::default().validate().is_ok());
        let mut c = SmeConfig::default();
        c.a_grid = vec![0.5, 1.0];
        assert!(c.validate().is_err());
        c.a_grid = vec![1.0, 0.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn multinomial_sums_to_draws() {
        let mut rng = rng_from_seed(9);
        for _ in 0..50 {
            let c = multinomial(&mut rng, 40, &[3, 0, 10, 7], 20);
            assert_eq!(c.iter().sum::<f64>(), 40.0);
            assert_eq!(c[1], 0.0);
        }
    }

    proptest! {
        #[test]
        fn monotone_in_similarity(
            recs in proptest::collection::vec(proptest::collection::vec(0u8..3, 6), 3),
            target in proptest::collection::vec(0u8..3, 6),
            a in 0.05f64..2.0,
        ) {
            let code = |v: &Vec<u8>| -> String { v.iter().map(|&c| ['S', 'I', 'R'][c as usize]).collect() };
            let mut target = target;
            target[0] = 1;
            let r = code(&target);
            let mut rs: Vec<String> = recs.iter().map(code).collect();
            let others = ["SSSSSI"; 3];
            let build = |rs: &[String]| {
                let refs: Vec<&str> = rs.iter().map(|s| s.as_str()).collect();
                let mut all: Vec<Vec<&str>> = vec![refs];
                for _ in 0..5 {
                    all.push(others.to_vec());
                }
                let slices: Vec<&[&str]> = all.iter().map(|v| v.as_slice()).collect();
                hand_dataset(&slices)
            };
            let before = sme_likelihoods(&snap(&r), &build(&rs), a).unwrap()[0];
            rs[0] = r.clone();
            let after = sme_likelihoods(&snap(&r), &build(&rs), a).unwrap()[0];
            prop_assert!(after >= before - 1e-15);
        }
    }
}
