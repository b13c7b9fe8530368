use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::epidemics::{DurationSpec, EpidemicParams, InfectedCount};
use crate::error::{Error, Result};
use crate::estimators::SmeConfig;
use crate::nnet::{ModelConfig, SearchSpace, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Gnn,
    /// GNN with the four structural input features.
    GnnDa,
    Mcmf,
    Sme,
    Betweenness,
    Jordan,
    Random,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Gnn,
        Method::GnnDa,
        Method::Mcmf,
        Method::Sme,
        Method::Betweenness,
        Method::Jordan,
        Method::Random,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Gnn => "GNN",
            Method::GnnDa => "GNN-DA",
            Method::Mcmf => "MCMF",
            Method::Sme => "SME",
            Method::Betweenness => "Betweenness",
            Method::Jordan => "Jordan",
            Method::Random => "Random",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.label().eq_ignore_ascii_case(s.trim()))
    }

    pub fn needs_training_data(self) -> bool {
        matches!(self, Method::Gnn | Method::GnnDa | Method::Mcmf | Method::Sme)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TMode {
    Fixed,
    /// Training durations drawn from `(0, 4 T*]`.
    Uniform4x,
}

/// One experiment, read from a `key = value` file. Relative paths resolve
/// against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub network: PathBuf,
    pub beta: f64,
    pub mu: f64,
    pub t_star: f64,
    /// Calibrate `t_star` to this mean infected fraction instead of using it.
    pub target_fraction: Option<f64>,
    pub counting: InfectedCount,
    pub n_train_per_source: usize,
    pub n_test_per_source: usize,
    pub seeds: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    pub t_mode: TMode,
    pub top_k: usize,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub sme: SmeConfig,
    pub tune_trials: usize,
    /// Detectability grid; `None` means seven points bracketing `t_star`.
    pub t_grid: Option<Vec<f64>>,
    pub n_grid: Vec<usize>,
    /// Upper bounds (inclusive) of outbreak-size categories, as node counts.
    pub size_bins: Vec<usize>,
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(network: impl Into<PathBuf>) -> Self {
        Self {
            name: "experiment".into(),
            network: network.into(),
            beta: 1.0,
            mu: 1.0,
            t_star: 1.0,
            target_fraction: None,
            counting: InfectedCount::NonSusceptible,
            n_train_per_source: 500,
            n_test_per_source: 100,
            seeds: 3,
            master_seed: 0,
            methods: Method::ALL.iter().copied().filter(|m| *m != Method::GnnDa).collect(),
            t_mode: TMode::Fixed,
            top_k: 5,
            model: ModelConfig::karate(),
            train: TrainConfig::default(),
            sme: SmeConfig::default(),
            tune_trials: 0,
            t_grid: None,
            n_grid: vec![50, 500, 5000, 10000],
            size_bins: vec![2, 5, 10, 15, 20],
            cache_dir: "cache".into(),
            out_dir: "results".into(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| perr(i + 1, "expected key = value".into()))?;
            if kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string())).is_some() {
                return Err(perr(i + 1, format!("duplicate key '{}'", k.trim())));
            }
        }
        let (_, network) = kv.remove("network").ok_or_else(|| perr(0, "missing key 'network'".into()))?;
        let mut c = Self::defaults(base.join(network));
        let mut model_preset = None;
        let mut model_keys = Vec::new();
        let mut augmentation = false;
        for (k, (line, v)) in kv {
            let f = Field { line, key: &k, value: &v };
            match k.as_str() {
                "name" => c.name = v.clone(),
                "beta" => c.beta = f.get()?,
                "mu" => c.mu = f.get()?,
                "t_star" => c.t_star = f.get()?,
                "target_fraction" => c.target_fraction = Some(f.get()?),
                "counting" => {
                    c.counting = match v.as_str() {
                        "non_susceptible" => InfectedCount::NonSusceptible,
                        "infectious" => InfectedCount::InfectiousOnly,
                        _ => return Err(perr(line, format!("counting: expected non_susceptible or infectious, got '{v}'"))),
                    }
                }
                "n_train_per_source" => c.n_train_per_source = f.get()?,
                "n_test_per_source" => c.n_test_per_source = f.get()?,
                "seeds" => c.seeds = f.get()?,
                "master_seed" => c.master_seed = f.get()?,
                "methods" => {
                    c.methods = v
                        .split(',')
                        .map(|m| Method::parse(m).ok_or_else(|| perr(line, format!("unknown method '{}'", m.trim()))))
                        .collect::<Result<_>>()?
                }
                "t_mode" => {
                    c.t_mode = match v.as_str() {
                        "fixed" => TMode::Fixed,
                        "uniform4x" => TMode::Uniform4x,
                        _ => return Err(perr(line, format!("t_mode: expected fixed or uniform4x, got '{v}'"))),
                    }
                }
                "top_k" => c.top_k = f.get()?,
                "model" => model_preset = Some((line, v.clone())),
                "augmentation" => augmentation = f.get()?,
                "n_pre" | "pre_dim" | "n_mp" | "mp_dim" | "n_post" | "skip" | "dropout" => model_keys.push((k.clone(), line, v.clone())),
                "lr" => c.train.lr = f.get()?,
                "weight_decay" => c.train.weight_decay = f.get()?,
                "decoupled_weight_decay" => c.train.decoupled_weight_decay = f.get()?,
                "batch_size" => c.train.batch_size = f.get()?,
                "max_epochs" => c.train.max_epochs = f.get()?,
                "patience" => c.train.patience = f.get()?,
                "sme_bootstrap" => c.sme.bootstrap_resamples = f.get()?,
                "sme_tol" => c.sme.convergence_tol = f.get()?,
                "tune_trials" => c.tune_trials = f.get()?,
                "t_grid" => c.t_grid = Some(f.list()?),
                "n_grid" => c.n_grid = f.list()?,
                "size_bins" => c.size_bins = f.list()?,
                "cache_dir" => c.cache_dir = base.join(&v),
                "out_dir" => c.out_dir = base.join(&v),
                _ => return Err(perr(line, format!("unknown key '{k}'"))),
            }
        }
        c.model = match model_preset {
            None => ModelConfig::karate(),
            Some((_, p)) if p == "karate" => ModelConfig::karate(),
            Some((_, p)) if p == "dolphin" => ModelConfig::dolphin(),
            Some((line, other)) => return Err(perr(line, format!("unknown model preset '{other}'"))),
        };
        for (k, line, v) in &model_keys {
            let f = Field { line: *line, key: k, value: v };
            match k.as_str() {
                "n_pre" => c.model.n_pre = f.get()?,
                "pre_dim" => c.model.pre_dim = f.get()?,
                "n_mp" => c.model.n_mp = f.get()?,
                "mp_dim" => c.model.mp_dim = f.get()?,
                "n_post" => c.model.n_post = f.get()?,
                "skip" => c.model.skip = f.get()?,
                "dropout" => c.model.dropout = f.get()?,
                _ => unreachable!(),
            }
        }
        if augmentation && !c.methods.contains(&Method::GnnDa) {
            c.methods.insert(1.min(c.methods.len()), Method::GnnDa);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        EpidemicParams::new(self.beta, self.mu)?;
        let bad = |m: &str| Err(Error::Invalid(m.into()));
        if !(self.t_star > 0.0 && self.t_star.is_finite()) {
            return bad("t_star must be positive");
        }
        if let Some(f) = self.target_fraction {
            if !(f > 0.0 && f < 1.0) {
                return bad("target_fraction must lie in (0, 1)");
            }
        }
        if self.n_train_per_source == 0 || self.n_test_per_source == 0 || self.seeds == 0 || self.top_k == 0 {
            return bad("counts must be at least 1");
        }
        if self.methods.is_empty() {
            return bad("no methods selected");
        }
        if let Some(g) = &self.t_grid {
            if g.is_empty() || g[0] <= 0.0 || g.windows(2).any(|w| w[0] >= w[1]) {
                return bad("t_grid must be ascending and positive");
            }
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be ascending and positive");
        }
        if self.size_bins.windows(2).any(|w| w[0] >= w[1]) {
            return bad("size_bins must be ascending");
        }
        self.model.validate()?;
        self.train.validate()?;
        self.sme.validate()
    }

    pub fn params(&self) -> EpidemicParams {
        EpidemicParams::new(self.beta, self.mu).expect("validated")
    }

    pub fn train_duration(&self, t_star: f64) -> DurationSpec {
        match self.t_mode {
            TMode::Fixed => DurationSpec::Fixed(t_star),
            TMode::Uniform4x => DurationSpec::uncertain(t_star),
        }
    }

    /// Seven points from `T*/8` to `3 T*`, with `T*` fourth.
    pub fn detectability_grid(&self, t_star: f64) -> Vec<f64> {
        self.t_grid
            .clone()
            .unwrap_or_else(|| [0.125, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0].iter().map(|f| f * t_star).collect())
    }

    pub fn search_space(&self, augmented: bool) -> SearchSpace {
        SearchSpace {
            augmented,
            ..SearchSpace::default()
        }
    }
}

fn perr(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

struct Field<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Field<'_> {
    fn parse<T: std::str::FromStr>(&self, v: &str) -> Result<T> {
        v.trim()
            .parse()
            .map_err(|_| perr(self.line, format!("{}: cannot parse '{v}'", self.key)))
    }

    fn get<T: std::str::FromStr>(&self) -> Result<T> {
        self.parse(self.value)
    }

    fn list<T: std::str::FromStr>(&self) -> Result<Vec<T>> {
        self.value.split(',').map(|x| self.parse(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_resolves_paths() {
        let text = "# karate\nnetwork = karate.edges\nbeta = 1.3\nt_star = 0.85 # table value\nmethods = GNN, mcmf,random\nmodel = dolphin\nskip = true\nt_grid = 0.1,0.5,1\n";
        let c = ExperimentConfig::parse(text, Path::new("/data")).unwrap();
        assert_eq!(c.network, Path::new("/data/karate.edges"));
        assert_eq!(c.beta, 1.3);
        assert_eq!(c.mu, 1.0);
        assert_eq!(c.methods, vec![Method::Gnn, Method::Mcmf, Method::Random]);
        assert_eq!(c.model.n_mp, ModelConfig::dolphin().n_mp);
        assert!(c.model.skip);
        assert_eq!(c.detectability_grid(1.0), vec![0.1, 0.5, 1.0]);
        assert_eq!(c.n_train_per_source, 500);
        let c = ExperimentConfig::parse("network = a\nmethods = random,gnn\naugmentation = true", p_dot()).unwrap();
        assert_eq!(c.methods, vec![Method::Random, Method::GnnDa, Method::Gnn]);
    }

    fn p_dot() -> &'static Path {
        Path::new(".")
    }

    #[test]
    fn rejects_bad_input() {
        let p = Path::new(".");
        assert!(ExperimentConfig::parse("beta = 1", p).is_err());
        assert!(ExperimentConfig::parse("network = a\nbeta = x", p).is_err());
        assert!(ExperimentConfig::parse("network = a\nfoo = 1", p).is_err());
        assert!(ExperimentConfig::parse("network = a\nseeds = 0", p).is_err());
        assert!(ExperimentConfig::parse("network = a\nt_star = -1", p).is_err());
        assert!(ExperimentConfig::parse("network = a\nbeta = 1\nbeta = 2", p).is_err());
        assert!(ExperimentConfig::parse("network = a\nt_grid = 2,1", p).is_err());
    }

    #[test]
    fn default_grid_brackets_t_star() {
        let c = ExperimentConfig::defaults("x");
        let g = c.detectability_grid(0.8);
        assert_eq!(g.len(), 7);
        assert_eq!(g[3], 0.8);
    }
}
