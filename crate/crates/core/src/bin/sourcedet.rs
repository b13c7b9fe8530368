use std::path::PathBuf;

use clap::{Parser, Subcommand};

use sourcedet::epidemics::Snapshot;
use sourcedet::harness::{self, write_text, ExperimentConfig, Method, PlotRow, Prepared};
use sourcedet::Result;

#[derive(Parser)]
#[command(name = "sourcedet", about = "Epidemic source detection experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Topology table for edge lists.
    Stats { edges: Vec<PathBuf> },
    /// Simulate a training dataset and save it.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        run: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a GNN on the run's dataset and save the bundle and learning curve.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        run: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random search over the architecture space.
    Tune {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Source distribution for one snapshot, as JSON.
    Detect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "GNN")]
        method: String,
        /// Node states as a string over {S, I, R}, in node order.
        #[arg(long)]
        snapshot: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics table for every configured method, across seeds.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Top-5 accuracy against epidemic duration.
    Detectability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Top-5 accuracy against training set size.
    Scaling {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Models trained on a range of durations against a fixed duration.
    UncertainT {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Training and inference cost per method.
    Timing {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.out_dir.join(&cfg.name))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse().cmd) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Stats { edges } => print!("{}", harness::stats_csv(&edges)?),
        Cmd::Simulate { config, run, out } => {
            let cfg = ExperimentConfig::load(config)?;
            let prep = Prepared::new(&cfg)?;
            let ds = prep.train_data(cfg.n_train_per_source, cfg.train_duration(prep.t_star), run)?;
            ds.save(&out)?;
            for s in ds.summary(10) {
                println!(
                    "T={:.3} records={} I={:.3} R={:.3}",
                    s.duration, s.records, s.mean_infectious_fraction, s.mean_recovered_fraction
                );
            }
        }
        Cmd::Train { config, run, out } => {
            let cfg = ExperimentConfig::load(config)?;
            let prep = Prepared::new(&cfg)?;
            let ds = prep.train_data(cfg.n_train_per_source, cfg.train_duration(prep.t_star), run)?;
            let (est, curve) = prep.gnn(Method::Gnn, &ds, &ds.content_hash(), &cfg.train, run)?;
            let bundle = est.bundle;
            bundle.save(&out)?;
            write_text(out.with_extension("curve.csv"), &curve.to_csv())?;
            println!(
                "epochs {} best epoch {} best val loss {:.4}",
                bundle.meta.epochs_run, bundle.meta.best_epoch, bundle.meta.best_val_loss
            );
        }
        Cmd::Tune { config, trials, out } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if let Some(t) = trials {
                cfg.tune_trials = t;
            }
            cfg.tune_trials = cfg.tune_trials.max(1);
            let prep = Prepared::new(&cfg)?;
            let ds = prep.train_data(cfg.n_train_per_source, cfg.train_duration(prep.t_star), 0)?;
            let res = prep.tune(&ds, &ds.content_hash(), cfg.model.augmented())?;
            write_text(&out, &res.to_csv())?;
            println!("{}", serde_json::to_string_pretty(&res.best)?);
        }
        Cmd::Detect {
            config,
            method,
            snapshot,
            out,
        } => {
            let cfg = ExperimentConfig::load(config)?;
            let prep = Prepared::new(&cfg)?;
            let m = Method::parse(&method).ok_or_else(|| sourcedet::Error::Invalid(format!("unknown method '{method}'")))?;
            let snap = Snapshot::from_code_string(&snapshot, prep.t_star)?;
            let train = m
                .needs_training_data()
                .then(|| prep.train_data(cfg.n_train_per_source, cfg.train_duration(prep.t_star), 0))
                .transpose()?;
            let hash = train.as_ref().map(|d| d.content_hash());
            let (est, _) = prep.estimator(m, train.as_ref().zip(hash.as_deref()), 0)?;
            let dist = est.estimate(&snap, cfg.master_seed)?;
            let json = serde_json::to_string_pretty(&dist.to_json(&prep.graph))?;
            match out {
                Some(p) => write_text(p, &json)?,
                None => println!("{json}"),
            }
        }
        Cmd::Benchmark { config, out } => {
            let cfg = ExperimentConfig::load(config)?;
            let res = harness::run_benchmark(&cfg)?;
            res.write(&out_dir(&cfg, out))?;
            print!("{}", res.table_csv());
        }
        Cmd::Detectability { config, out } => {
            let cfg = ExperimentConfig::load(config)?;
            let res = harness::run_detectability(&cfg)?;
            res.write(&out_dir(&cfg, out))?;
            print!("{}", PlotRow::csv(&res.plot_rows()));
        }
        Cmd::Scaling { config, out } => {
            let cfg = ExperimentConfig::load(config)?;
            let res = harness::run_scaling(&cfg)?;
            res.write(&out_dir(&cfg, out).join("scaling.csv"))?;
            print!("{}", PlotRow::csv(&res.plot_rows()));
        }
        Cmd::UncertainT { config, out } => {
            let cfg = ExperimentConfig::load(config)?;
            let res = harness::run_uncertain_t(&cfg)?;
            res.grid.write(&out_dir(&cfg, out).join("uncertain_t.csv"))?;
            print!("{}", PlotRow::csv(&res.grid.plot_rows()));
            println!("# mean sampled training duration {:.4}", res.mean_sampled_t);
        }
        Cmd::Timing { config, out } => {
            let cfg = ExperimentConfig::load(config)?;
            let res = harness::run_timing(&cfg)?;
            write_text(out_dir(&cfg, out).join("timing.csv"), &res.csv())?;
            print!("{}", res.csv());
        }
    }
    Ok(())
}
