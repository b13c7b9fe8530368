//! Training on the exact duration versus durations drawn from (0, 4T*].
//!
//!     cargo run --release --example uncertain_duration

use std::path::Path;

use sourcedet::harness::ExperimentConfig;

// Karate at reduced sizes; the full settings live in configs/karate.conf.
fn config(extra: &str) -> sourcedet::Result<ExperimentConfig> {
    let base = Path::new(env!("CARGO_MANIFEST_DIR"));
    let text = format!(
        "name = karate\nnetwork = data/karate.edges\nbeta = 1.3\nmu = 1.0\nt_star = 0.85\nmodel = karate\n\
         n_train_per_source = 100\nn_test_per_source = 20\nseeds = 2\nmax_epochs = 20\n\
         cache_dir = cache/examples\nout_dir = results/examples\n{extra}"
    );
    ExperimentConfig::parse(&text, base)
}

fn main() -> sourcedet::Result<()> {
    let cfg = config("methods = GNN,MCMF,Random\n")?;
    let res = sourcedet::harness::run_uncertain_t(&cfg)?;
    print!("{}", sourcedet::harness::PlotRow::csv(&res.grid.plot_rows()));
    println!("mean sampled duration {:.3}", res.mean_sampled_t);
    Ok(())
}
