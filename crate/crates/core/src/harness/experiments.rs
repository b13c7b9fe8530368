use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::cache::StageCache;
use super::config::{ExperimentConfig, Method};
use super::output::{write_text, PlotRow};
use crate::epidemics::{calibrate_duration, DurationSpec, NodeState, SimDataset, Snapshot};
use crate::error::{Error, Result};
use crate::estimators::{
    BetweennessEstimator, JordanEstimator, McmfEstimator, RandomEstimator, SmeEstimator, SmeIndex, SourceEstimator,
};
use crate::evalkit::{aggregate_runs, distance_matrix, evaluate_suite, AggregateReport, CaseOutcome, Estimate, MetricsReport};
use crate::netgraph::Graph;
use crate::nnet::{tune, GnnEstimator, LearningCurve, ModelConfig, TrainConfig, TuneResult};
use crate::rng::{derive_named, derive_seed};

/// Graph, calibrated duration and cache shared by every stage of one experiment.
pub struct Prepared {
    pub cfg: ExperimentConfig,
    pub graph: Graph,
    pub t_star: f64,
    pub distances: Vec<Vec<usize>>,
    pub cache: StageCache,
}

impl Prepared {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        if !cfg.network.exists() {
            return Err(Error::Invalid(format!("network file {} not found", cfg.network.display())));
        }
        let graph = Graph::load(&cfg.network)?;
        graph.require_connected()?;
        let cache = StageCache::new(&cfg.cache_dir)?;
        let t_star = match cfg.target_fraction {
            None => cfg.t_star,
            Some(f) => {
                let key = (graph.content_hash(), cfg.params(), f, cfg.counting);
                cache.json("calibration", &key, || {
                    calibrate_duration(&graph, &cfg.params(), f, 200 * graph.node_count(), cfg.counting)
                })?
            }
        };
        let distances = distance_matrix(&graph)?;
        Ok(Self {
            cfg: cfg.clone(),
            graph,
            t_star,
            distances,
            cache,
        })
    }

    fn stream(&self, name: &str, run: usize) -> u64 {
        derive_seed(derive_named(self.cfg.master_seed, name), run as u64)
    }

    pub fn train_data(&self, n_per_source: usize, duration: DurationSpec, run: usize) -> Result<SimDataset> {
        self.cache
            .dataset(&self.graph, &self.cfg.params(), n_per_source, duration, self.stream("train", run))
    }

    pub fn test_data(&self, t: f64, run: usize) -> Result<SimDataset> {
        self.cache.dataset(
            &self.graph,
            &self.cfg.params(),
            self.cfg.n_test_per_source,
            DurationSpec::Fixed(t),
            self.stream("test", run),
        )
    }

    /// Tuned architecture when `tune_trials > 0`, otherwise the configured one.
    pub fn model_for(&self, method: Method, train: &SimDataset, train_hash: &str) -> Result<ModelConfig> {
        let augmented = method == Method::GnnDa;
        if self.cfg.tune_trials == 0 {
            return Ok(self.cfg.model.clone().with_augmentation(augmented));
        }
        Ok(self.tune(train, train_hash, augmented)?.best)
    }

    pub fn tune(&self, train: &SimDataset, train_hash: &str, augmented: bool) -> Result<TuneResult> {
        let space = self.cfg.search_space(augmented);
        let seed = derive_named(self.cfg.master_seed, "tune");
        let key = (train_hash, &space, &self.cfg.train, self.cfg.tune_trials, seed);
        self.cache.json("tune", &key, || {
            tune(&space, train, &self.graph, &self.cfg.train, self.cfg.tune_trials, seed)
        })
    }

    /// Trains (or loads) the GNN for one run.
    pub fn gnn<'g>(&'g self, method: Method, train: &SimDataset, hash: &str, train_cfg: &TrainConfig, run: usize) -> Result<(GnnEstimator<'g>, LearningCurve)> {
        let model = self.model_for(method, train, hash)?;
        let seed = self.stream(method.label(), run);
        let (bundle, curve) = self.cache.gnn(&self.graph, train, hash, &model, train_cfg, seed)?;
        Ok((
            GnnEstimator {
                bundle,
                graph: &self.graph,
                label: method.label().into(),
            },
            curve,
        ))
    }

    /// Builds the estimator for `method`; data-driven methods use `train`.
    pub fn estimator<'g>(&'g self, method: Method, train: Option<(&SimDataset, &str)>, run: usize) -> Result<(Box<dyn SourceEstimator + 'g>, Option<LearningCurve>)> {
        let need = || train.ok_or_else(|| Error::Invalid(format!("{} needs training data", method.label())));
        Ok(match method {
            Method::Random => (Box::new(RandomEstimator), None),
            Method::Jordan => (Box::new(JordanEstimator(&self.graph)), None),
            Method::Betweenness => (Box::new(BetweennessEstimator(&self.graph)), None),
            Method::Mcmf => {
                let (ds, hash) = need()?;
                (Box::new(McmfEstimator(self.cache.mcmf_table(&self.graph, ds, hash)?)), None)
            }
            Method::Sme => {
                let (ds, _) = need()?;
                let est = SmeEstimator {
                    index: SmeIndex::new(ds)?,
                    config: self.cfg.sme.clone(),
                };
                (Box::new(est), None)
            }
            Method::Gnn | Method::GnnDa => {
                let (ds, hash) = need()?;
                let (est, curve) = self.gnn(method, ds, hash, &self.cfg.train, run)?;
                (Box::new(est), Some(curve))
            }
        })
    }

    pub fn evaluate(&self, est: &dyn SourceEstimator, test: &SimDataset, run: usize) -> Result<Vec<CaseOutcome>> {
        let cases: Vec<(Snapshot, usize)> = test.records.iter().map(|r| (r.snapshot.clone(), r.source)).collect();
        evaluate_suite(est, &cases, &self.distances, derive_named(self.stream("eval", run), est.name()))
    }

    /// Trains (or loads) and scores each method on one test suite.
    fn score(&self, methods: &[Method], train: Option<&SimDataset>, test: &SimDataset, run: usize) -> Result<Vec<MethodRun>> {
        let hash = train.map(|d| d.content_hash());
        let mut out = Vec::new();
        for &m in methods {
            let started = Instant::now();
            let (est, curve) = self.estimator(m, train.zip(hash.as_deref()), run)?;
            let outcomes = self.evaluate(est.as_ref(), test, run)?;
            let report = MetricsReport::from_outcomes(m.label(), &outcomes, self.cfg.top_k)?;
            log::info!(
                "{} run {run}: top-{} {:.4} ({:.1}s)",
                m.label(),
                self.cfg.top_k,
                report.top_k_accuracy,
                started.elapsed().as_secs_f64()
            );
            out.push(MethodRun {
                method: m,
                run,
                report,
                outcomes,
                curve,
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub run: usize,
    pub report: MetricsReport,
    pub outcomes: Vec<CaseOutcome>,
    pub curve: Option<LearningCurve>,
}

fn needs_training(methods: &[Method]) -> bool {
    methods.iter().any(|m| m.needs_training_data())
}

fn estimate_of(runs: &[MethodRun], m: Method) -> Estimate {
    let v: Vec<f64> = runs.iter().filter(|r| r.method == m).map(|r| r.report.top_k_accuracy).collect();
    Estimate::from_runs(&v)
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub network: String,
    pub t_star: f64,
    pub runs: Vec<MethodRun>,
    pub aggregate: Vec<AggregateReport>,
    /// Top-k accuracy per outbreak-size category, pooled over runs.
    pub by_size: Vec<PlotRow>,
}

impl BenchmarkResult {
    pub fn aggregate_for(&self, m: Method) -> Option<&AggregateReport> {
        self.aggregate.iter().find(|a| a.method == m.label())
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = format!("{}\n", MetricsReport::csv_header());
        for r in &self.runs {
            out += &r.report.csv_row(&self.network, r.run);
            out.push('\n');
        }
        out
    }

    pub fn table_csv(&self) -> String {
        let mut out = format!("{}\n", AggregateReport::csv_header());
        for a in &self.aggregate {
            out += &a.csv_row(&self.network);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_text(dir.join("metrics.csv"), &self.metrics_csv())?;
        write_text(dir.join("table.csv"), &self.table_csv())?;
        write_text(dir.join("by_outbreak_size.csv"), &PlotRow::csv(&self.by_size))?;
        for r in &self.runs {
            if let Some(c) = &r.curve {
                write_text(dir.join(format!("curve_{}_run{}.csv", r.method.label(), r.run)), &c.to_csv())?;
            }
        }
        Ok(())
    }
}

fn size_label(bins: &[usize], b: usize) -> String {
    let lo = if b == 0 { 1 } else { bins[b - 1] + 1 };
    match bins.get(b) {
        Some(&hi) if hi == lo => format!("{lo}"),
        Some(&hi) => format!("{lo}-{hi}"),
        None => format!(">{}", bins.last().copied().unwrap_or(0)),
    }
}

/// Top-k accuracy by outbreak size with a 95% normal-approximation binomial
/// interval, plus the case count per category under the series "outbreaks".
pub fn outbreak_size_breakdown(runs: &[MethodRun], methods: &[Method], bins: &[usize], k: usize) -> Vec<PlotRow> {
    let category = |size: usize| bins.iter().position(|&hi| size <= hi).unwrap_or(bins.len());
    let n_cat = bins.len() + 1;
    let mut rows = Vec::new();
    let mut counted = false;
    for &m in methods {
        let mut hits = vec![0usize; n_cat];
        let mut total = vec![0usize; n_cat];
        for r in runs.iter().filter(|r| r.method == m) {
            for o in &r.outcomes {
                let c = category(o.outbreak_size);
                total[c] += 1;
                hits[c] += (o.rank <= k) as usize;
            }
        }
        for c in 0..n_cat {
            if total[c] == 0 {
                continue;
            }
            let p = hits[c] as f64 / total[c] as f64;
            rows.push(PlotRow::new(size_label(bins, c), m.label(), p, Some(1.96 * (p * (1.0 - p) / total[c] as f64).sqrt())));
        }
        if !counted {
            counted = true;
            // mean count per run, so the bars describe one test suite
            let n_runs = runs.iter().filter(|r| r.method == m).count().max(1);
            for c in 0..n_cat {
                if total[c] > 0 {
                    rows.push(PlotRow::new(size_label(bins, c), "outbreaks", total[c] as f64 / n_runs as f64, None));
                }
            }
        }
    }
    rows
}

/// Every configured method on `seeds` independent train/test draws.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkResult> {
    let prep = Prepared::new(cfg)?;
    let duration = cfg.train_duration(prep.t_star);
    let mut runs = Vec::new();
    for run in 0..cfg.seeds {
        let train = needs_training(&cfg.methods)
            .then(|| prep.train_data(cfg.n_train_per_source, duration, run))
            .transpose()?;
        let test = prep.test_data(prep.t_star, run)?;
        runs.extend(prep.score(&cfg.methods, train.as_ref(), &test, run)?);
    }
    let mut aggregate = Vec::new();
    for &m in &cfg.methods {
        let reports: Vec<MetricsReport> = runs.iter().filter(|r| r.method == m).map(|r| r.report.clone()).collect();
        aggregate.push(aggregate_runs(&reports)?);
    }
    let by_size = outbreak_size_breakdown(&runs, &cfg.methods, &cfg.size_bins, cfg.top_k);
    Ok(BenchmarkResult {
        network: cfg.name.clone(),
        t_star: prep.t_star,
        runs,
        aggregate,
        by_size,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectabilityPoint {
    pub t: f64,
    pub gnn: Estimate,
    pub random: Estimate,
    pub infectious_fraction: f64,
    pub recovered_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectabilityResult {
    pub points: Vec<DetectabilityPoint>,
}

impl DetectabilityResult {
    pub fn plot_rows(&self) -> Vec<PlotRow> {
        let mut rows = Vec::new();
        for p in &self.points {
            let x = p.t.to_string();
            rows.push(PlotRow::new(&x, "GNN", p.gnn.mean, p.gnn.ci95));
            rows.push(PlotRow::new(&x, "Random", p.random.mean, p.random.ci95));
            rows.push(PlotRow::new(&x, "infectious_fraction", p.infectious_fraction, None));
            rows.push(PlotRow::new(&x, "recovered_fraction", p.recovered_fraction, None));
        }
        rows
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_text(dir.join("detectability.csv"), &PlotRow::csv(&self.plot_rows()))
    }
}

/// GNN and Random top-k accuracy as the observation time grows; the GNN is
/// retrained on a fresh dataset at every grid point.
pub fn run_detectability(cfg: &ExperimentConfig) -> Result<DetectabilityResult> {
    let prep = Prepared::new(cfg)?;
    let mut points = Vec::new();
    for t in cfg.detectability_grid(prep.t_star) {
        let mut runs = Vec::new();
        let (mut fi, mut fr, mut cases) = (0.0, 0.0, 0usize);
        for run in 0..cfg.seeds {
            let train = prep.train_data(cfg.n_train_per_source, DurationSpec::Fixed(t), run)?;
            let test = prep.test_data(t, run)?;
            let n = test.node_count as f64;
            for r in &test.records {
                fi += r.snapshot.count(NodeState::Infectious) as f64 / n;
                fr += r.snapshot.count(NodeState::Recovered) as f64 / n;
            }
            cases += test.records.len();
            runs.extend(prep.score(&[Method::Gnn, Method::Random], Some(&train), &test, run)?);
        }
        points.push(DetectabilityPoint {
            t,
            gnn: estimate_of(&runs, Method::Gnn),
            random: estimate_of(&runs, Method::Random),
            infectious_fraction: fi / cases as f64,
            recovered_fraction: fr / cases as f64,
        });
    }
    Ok(DetectabilityResult { points })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub x: String,
    pub method: String,
    pub accuracy: Estimate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
}

impl GridResult {
    pub fn get(&self, x: &str, m: Method) -> Option<Estimate> {
        self.cells.iter().find(|c| c.x == x && c.method == m.label()).map(|c| c.accuracy)
    }

    pub fn plot_rows(&self) -> Vec<PlotRow> {
        self.cells
            .iter()
            .map(|c| PlotRow::new(&c.x, &c.method, c.accuracy.mean, c.accuracy.ci95))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &PlotRow::csv(&self.plot_rows()))
    }
}

/// Top-k accuracy of the GNN, SME and MCMF against simulations per node.
/// Training sets for one run are prefixes of each other and every grid
/// point is scored on that run's test suite.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<GridResult> {
    let prep = Prepared::new(cfg)?;
    let methods: Vec<Method> = [Method::Gnn, Method::Sme, Method::Mcmf]
        .into_iter()
        .filter(|m| cfg.methods.contains(m))
        .collect();
    if methods.is_empty() {
        return Err(Error::Invalid("scaling needs at least one of GNN, SME, MCMF".into()));
    }
    let duration = cfg.train_duration(prep.t_star);
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let mut runs = Vec::new();
        for run in 0..cfg.seeds {
            let train = prep.train_data(n, duration, run)?;
            let test = prep.test_data(prep.t_star, run)?;
            runs.extend(prep.score(&methods, Some(&train), &test, run)?);
        }
        for &m in &methods {
            cells.push(GridCell {
                x: n.to_string(),
                method: m.label().into(),
                accuracy: estimate_of(&runs, m),
            });
        }
    }
    Ok(GridResult { cells })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UncertainResult {
    pub grid: GridResult,
    /// Mean sampled training duration under the uncertain condition.
    pub mean_sampled_t: f64,
}

/// Every method trained with the exact duration (`fixed`) and with durations
/// drawn from `(0, 4 T*]` (`uniform4x`), both tested at `T*`.
pub fn run_uncertain_t(cfg: &ExperimentConfig) -> Result<UncertainResult> {
    let prep = Prepared::new(cfg)?;
    let mut cells = Vec::new();
    let (mut t_sum, mut t_n) = (0.0, 0usize);
    for (label, duration) in [("fixed", DurationSpec::Fixed(prep.t_star)), ("uniform4x", DurationSpec::uncertain(prep.t_star))] {
        let mut runs = Vec::new();
        for run in 0..cfg.seeds {
            let train = needs_training(&cfg.methods)
                .then(|| prep.train_data(cfg.n_train_per_source, duration, run))
                .transpose()?;
            if let (Some(ds), DurationSpec::UniformUpTo(_)) = (&train, duration) {
                t_sum += ds.records.iter().map(|r| r.duration()).sum::<f64>();
                t_n += ds.records.len();
            }
            let test = prep.test_data(prep.t_star, run)?;
            runs.extend(prep.score(&cfg.methods, train.as_ref(), &test, run)?);
        }
        for &m in &cfg.methods {
            cells.push(GridCell {
                x: label.into(),
                method: m.label().into(),
                accuracy: estimate_of(&runs, m),
            });
        }
    }
    Ok(UncertainResult {
        grid: GridResult { cells },
        mean_sampled_t: if t_n == 0 { f64::NAN } else { t_sum / t_n as f64 },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingRow {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingResult {
    pub network: String,
    pub rows: Vec<TimingRow>,
}

impl TimingResult {
    pub fn seconds(&self, stage: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.stage == stage).map(|r| r.seconds)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("network,stage,seconds\n");
        for r in &self.rows {
            out += &format!("{},{},{}\n", self.network, r.stage, r.seconds);
        }
        out
    }
}

/// Wall-clock means: per simulated outbreak, per GNN training batch, and per
/// test instance for each data-driven method. Uses run 0's artifacts.
pub fn run_timing(cfg: &ExperimentConfig) -> Result<TimingResult> {
    let prep = Prepared::new(cfg)?;
    let mut rows = Vec::new();

    let started = Instant::now();
    let fresh = crate::epidemics::generate_dataset(
        &prep.graph,
        &cfg.params(),
        cfg.n_test_per_source,
        DurationSpec::Fixed(prep.t_star),
        derive_named(cfg.master_seed, "timing"),
    )?;
    rows.push(TimingRow {
        stage: "simulation".into(),
        seconds: started.elapsed().as_secs_f64() / fresh.records.len() as f64,
    });

    let train = prep.train_data(cfg.n_train_per_source, cfg.train_duration(prep.t_star), 0)?;
    let hash = train.content_hash();
    let test = prep.test_data(prep.t_star, 0)?;
    if cfg.methods.iter().any(|m| matches!(m, Method::Gnn | Method::GnnDa)) {
        let short = TrainConfig {
            max_epochs: 2,
            patience: 1,
            ..cfg.train.clone()
        };
        let model = prep.model_for(Method::Gnn, &train, &hash)?;
        let out = crate::nnet::train(&train, &prep.graph, &model, &short, derive_named(cfg.master_seed, "timing"))?;
        rows.push(TimingRow {
            stage: "gnn_train_batch".into(),
            seconds: out.seconds_per_batch,
        });
    }
    for m in [Method::Gnn, Method::Mcmf, Method::Sme] {
        if !cfg.methods.contains(&m) {
            continue;
        }
        let (est, _) = prep.estimator(m, Some((&train, &hash)), 0)?;
        let started = Instant::now();
        prep.evaluate(est.as_ref(), &test, 0)?;
        rows.push(TimingRow {
            stage: format!("{}_inference", m.label().to_lowercase()),
            seconds: started.elapsed().as_secs_f64() / test.records.len() as f64,
        });
    }
    Ok(TimingResult {
        network: cfg.name.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path, methods: &str) -> ExperimentConfig {
        let edges = dir.join("g.edges");
        std::fs::write(&edges, "0 1\n1 2\n2 3\n3 4\n4 0\n1 3\n").unwrap();
        let text = format!(
            "network = g.edges\nname = tiny\nbeta = 1.5\nt_star = 0.5\nn_train_per_source = 20\nn_test_per_source = 6\nseeds = 2\nmethods = {methods}\nmax_epochs = 3\npatience = 2\nbatch_size = 16\nsme_bootstrap = 5\nn_grid = 5,20\nt_grid = 0.2,0.6\nsize_bins = 1,3\n"
        );
        ExperimentConfig::parse(&text, dir).unwrap()
    }

    #[test]
    fn benchmark_is_deterministic_and_random_only_skips_training() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path(), "gnn,mcmf,sme,betweenness,jordan,random");
        let a = run_benchmark(&cfg).unwrap();
        assert_eq!(a.aggregate.len(), 6);
        assert_eq!(a.runs.len(), 12);
        assert_eq!(a.runs[0].report.n_cases, 30);
        // second pass is served from the cache and must agree byte for byte
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(a.metrics_csv(), b.metrics_csv());
        let mut fresh = cfg.clone();
        fresh.cache_dir = dir.path().join("other");
        assert_eq!(run_benchmark(&fresh).unwrap().metrics_csv(), a.metrics_csv());

        let out = dir.path().join("out");
        a.write(&out).unwrap();
        assert!(out.join("curve_GNN_run1.csv").exists());
        let plot = std::fs::read_to_string(out.join("by_outbreak_size.csv")).unwrap();
        assert!(plot.starts_with("x,series,value,ci\n"));

        let r = tiny(dir.path(), "random");
        let mut r = r.clone();
        r.cache_dir = dir.path().join("random_only");
        let res = run_benchmark(&r).unwrap();
        assert_eq!(res.aggregate.len(), 1);
        let files: Vec<_> = std::fs::read_dir(&r.cache_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert!(files.iter().all(|f| f.to_string_lossy().starts_with("data-")));
        assert_eq!(files.len(), 2);
    }

    #[test]
    fn size_breakdown_counts_every_case() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path(), "random,jordan");
        let a = run_benchmark(&cfg).unwrap();
        let counted: f64 = a.by_size.iter().filter(|r| r.series == "outbreaks").map(|r| r.value).sum();
        assert!((counted - 30.0).abs() < 1e-9);
        let labels: Vec<&str> = a.by_size.iter().filter(|r| r.series == "outbreaks").map(|r| r.x.as_str()).collect();
        assert!(labels.iter().all(|l| ["1", "2-3", ">3"].contains(l)));
    }

    #[test]
    fn grid_experiments_produce_every_cell() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path(), "gnn,mcmf,sme,random");
        let d = run_detectability(&cfg).unwrap();
        assert_eq!(d.points.len(), 2);
        assert!(d.points[0].infectious_fraction + d.points[0].recovered_fraction < d.points[1].infectious_fraction + d.points[1].recovered_fraction);
        let s = run_scaling(&cfg).unwrap();
        assert_eq!(s.cells.len(), 6);
        assert!(s.get("20", Method::Sme).is_some());
        let u = run_uncertain_t(&cfg).unwrap();
        assert_eq!(u.grid.cells.len(), 8);
        assert!((u.mean_sampled_t - 1.0).abs() < 0.15);
        let t = run_timing(&cfg).unwrap();
        assert!(t.seconds("simulation").unwrap() > 0.0);
        assert!(t.seconds("sme_inference").is_some());
    }
}
