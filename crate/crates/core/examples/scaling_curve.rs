//! Accuracy against simulations per node on nested training sets.
//!
//!     cargo run --release --example scaling_curve

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
    let cfg = config("seeds = 1\nmethods = GNN,MCMF\nn_grid = 20,100,400\n")?;
    let res = sourcedet::harness::run_scaling(&cfg)?;
    print!("{}", sourcedet::harness::PlotRow::csv(&res.plot_rows()));
    res.write(&cfg.out_dir.join(&cfg.name).join("scaling.csv"))?;
    Ok(())
}
