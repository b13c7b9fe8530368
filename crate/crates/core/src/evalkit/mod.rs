//! Ranking metrics for source estimates and t-based intervals across runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::epidemics::Snapshot;
use crate::error::{Error, Result};
use crate::estimators::{SourceDistribution, SourceEstimator};
use crate::netgraph::{shortest_path_lengths, Graph, UNREACHABLE};
use crate::rng::derive_seed;

/// 1-based rank of the true source (descending score, ties to the lower index
/// or the distribution's own tie order).
pub fn rank_of_source(dist: &SourceDistribution, true_source: usize) -> usize {
    dist.rank_of(true_source)
}

/// Fraction of cases whose true source ranks within the top `k`.
pub fn top_k_accuracy(cases: &[(SourceDistribution, usize)], k: usize) -> Result<f64> {
    if cases.is_empty() {
        return Err(Error::Invalid("no cases to score".into()));
    }
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let hits = cases.iter().filter(|(d, q)| d.rank_of(*q) <= k).count();
    Ok(hits as f64 / cases.len() as f64)
}

/// All-pairs hop distances, row per source.
pub fn distance_matrix(g: &Graph) -> Result<Vec<Vec<usize>>> {
    g.require_connected()?;
    (0..g.node_count()).map(|v| shortest_path_lengths(g, v)).collect()
}

/// Mean shortest-path distance between the true source and the top-ranked node.
pub fn error_distance(cases: &[(SourceDistribution, usize)], g: &Graph) -> Result<f64> {
    if cases.is_empty() {
        return Err(Error::Invalid("no cases to score".into()));
    }
    g.require_connected()?;
    let mut total = 0usize;
    for (d, q) in cases {
        let dist = shortest_path_lengths(g, *q)?;
        let m = dist[d.map_estimate()];
        debug_assert_ne!(m, UNREACHABLE);
        total += m;
    }
    Ok(total as f64 / cases.len() as f64)
}

/// Number of top-ranked nodes needed to accumulate `level` of the mass.
pub fn credible_set_size(dist: &SourceDistribution, level: f64) -> Result<usize> {
    let probs = dist.probs()?;
    let mut acc = 0.0;
    for (k, v) in dist.ranking().into_iter().enumerate() {
        acc += probs[v];
        // tolerance for mass that sums to one only up to rounding
        if acc >= level - 1e-12 {
            return Ok(k + 1);
        }
    }
    Ok(probs.len())
}

/// Per-case summary, enough to compute every metric without the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub true_source: usize,
    pub rank: usize,
    pub map: usize,
    pub error_distance: usize,
    pub css90: Option<usize>,
    /// Non-susceptible nodes in the snapshot.
    pub outbreak_size: usize,
}

impl CaseOutcome {
    pub fn new(dist: &SourceDistribution, true_source: usize, snapshot: &Snapshot, distances: &[Vec<usize>]) -> Self {
        let map = dist.map_estimate();
        Self {
            true_source,
            rank: dist.rank_of(true_source),
            map,
            error_distance: distances[true_source][map],
            css90: credible_set_size(dist, 0.9).ok(),
            outbreak_size: snapshot.infected_count(),
        }
    }
}

/// Runs an estimator over `(snapshot, true source)` cases in parallel chunks.
/// Case `i` receives seed `derive_seed(seed, i)`.
pub fn evaluate_suite(
    estimator: &dyn SourceEstimator,
    cases: &[(Snapshot, usize)],
    distances: &[Vec<usize>],
    seed: u64,
) -> Result<Vec<CaseOutcome>> {
    const CHUNK: usize = 128;
    let chunks: Vec<Vec<CaseOutcome>> = cases
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, part)| {
            let snaps: Vec<&Snapshot> = part.iter().map(|(s, _)| s).collect();
            let seeds: Vec<u64> = (0..part.len()).map(|i| derive_seed(seed, (c * CHUNK + i) as u64)).collect();
            let dists = estimator.estimate_batch(&snaps, &seeds)?;
            Ok(dists
                .iter()
                .zip(part)
                .map(|(d, (s, q))| CaseOutcome::new(d, *q, s, distances))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub k: usize,
    pub top_k_accuracy: f64,
    pub top1_accuracy: f64,
    pub error_distance: f64,
    pub reciprocal_rank: f64,
    /// Mean 90% credible set size; probabilistic methods only.
    pub css90: Option<f64>,
    pub n_cases: usize,
}

impl MetricsReport {
    pub fn from_outcomes(method: &str, outcomes: &[CaseOutcome], k: usize) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::Invalid("no cases to score".into()));
        }
        let n = outcomes.len() as f64;
        let mean = |f: &dyn Fn(&CaseOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
        let css90 = if outcomes.iter().all(|o| o.css90.is_some()) {
            Some(mean(&|o| o.css90.unwrap() as f64))
        } else {
            None
        };
        Ok(Self {
            method: method.to_string(),
            k,
            top_k_accuracy: mean(&|o| (o.rank <= k) as u8 as f64),
            top1_accuracy: mean(&|o| (o.rank == 1) as u8 as f64),
            error_distance: mean(&|o| o.error_distance as f64),
            reciprocal_rank: mean(&|o| 1.0 / o.rank as f64),
            css90,
            n_cases: outcomes.len(),
        })
    }

    pub fn csv_header() -> &'static str {
        "network,method,run,k,top_k_accuracy,top1_accuracy,error_distance,reciprocal_rank,css90,n_cases"
    }

    pub fn csv_row(&self, network: &str, run: usize) -> String {
        format!(
            "{network},{},{run},{},{},{},{},{},{},{}",
            self.method,
            self.k,
            self.top_k_accuracy,
            self.top1_accuracy,
            self.error_distance,
            self.reciprocal_rank,
            self.css90.map_or(String::new(), |c| c.to_string()),
            self.n_cases
        )
    }
}

/// Mean and 95% half-width of one metric across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// `None` with fewer than two runs.
    pub ci95: Option<f64>,
}

impl Estimate {
    pub fn from_runs(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n.max(1) as f64;
        Self {
            mean,
            ci95: t_halfwidth(values),
        }
    }
}

/// `t_{0.975, n-1} * s / sqrt(n)`.
pub fn t_halfwidth(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).ok()?.inverse_cdf(0.975);
    Some(t * var.sqrt() / (n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub method: String,
    pub k: usize,
    pub runs: usize,
    pub top_k_accuracy: Estimate,
    pub top1_accuracy: Estimate,
    pub error_distance: Estimate,
    pub reciprocal_rank: Estimate,
    pub css90: Option<Estimate>,
}

impl AggregateReport {
    pub fn csv_header() -> &'static str {
        "network,method,runs,k,top_k_accuracy,top_k_ci95,error_distance,error_distance_ci95,reciprocal_rank,reciprocal_rank_ci95,css90,css90_ci95"
    }

    pub fn csv_row(&self, network: &str) -> String {
        let ci = |e: &Estimate| e.ci95.map_or(String::new(), |c| c.to_string());
        let (css, css_ci) = match &self.css90 {
            Some(e) => (e.mean.to_string(), ci(e)),
            None => (String::new(), String::new()),
        };
        format!(
            "{network},{},{},{},{},{},{},{},{},{},{css},{css_ci}",
            self.method,
            self.runs,
            self.k,
            self.top_k_accuracy.mean,
            ci(&self.top_k_accuracy),
            self.error_distance.mean,
            ci(&self.error_distance),
            self.reciprocal_rank.mean,
            ci(&self.reciprocal_rank),
        )
    }
}

/// Mean and t-interval of each metric over runs of one method.
pub fn aggregate_runs(runs: &[MetricsReport]) -> Result<AggregateReport> {
    let first = runs.first().ok_or_else(|| Error::Invalid("no runs to aggregate".into()))?;
    if runs.iter().any(|r| r.method != first.method || r.k != first.k) {
        return Err(Error::Invalid("runs mix methods or k".into()));
    }
    let col = |f: fn(&MetricsReport) -> f64| Estimate::from_runs(&runs.iter().map(f).collect::<Vec<_>>());
    let css90 = if runs.iter().all(|r| r.css90.is_some()) {
        Some(col(|r| r.css90.unwrap()))
    } else {
        None
    };
    Ok(AggregateReport {
        method: first.method.clone(),
        k: first.k,
        runs: runs.len(),
        top_k_accuracy: col(|r| r.top_k_accuracy),
        top1_accuracy: col(|r| r.top1_accuracy),
        error_distance: col(|r| r.error_distance),
        reciprocal_rank: col(|r| r.reciprocal_rank),
        css90,
    })
}
