//! Trains the Karate GNN on a small dataset, prints the learning curve and
//! round-trips the bundle.
//!
//!     cargo run --release --example train_gnn

use sourcedet::epidemics::{generate_dataset, simulate, DurationSpec, EpidemicParams};
use sourcedet::netgraph::Graph;
use sourcedet::nnet::{train, ModelBundle, ModelConfig, TrainConfig};

fn main() -> sourcedet::Result<()> {
    let g = Graph::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))?;
    let params = EpidemicParams::new(1.3, 1.0)?;
    let ds = generate_dataset(&g, &params, 100, DurationSpec::Fixed(0.85), 1)?;
    let cfg = TrainConfig {
        max_epochs: 30,
        ..TrainConfig::default()
    };
    let out = train(&ds, &g, &ModelConfig::karate(), &cfg, 0)?;
    for e in &out.curve.epochs {
        println!(
            "epoch {:>3}  train {:.4}  val {:.4}  val top-1 {:.3}",
            e.epoch, e.train_loss, e.val_loss, e.val_top1
        );
    }
    println!(
        "best epoch {}, {:.2} ms per batch",
        out.bundle.meta.best_epoch,
        1e3 * out.seconds_per_batch
    );

    let path = std::env::temp_dir().join("karate_example.sdmb");
    out.bundle.save(&path)?;
    let bundle = ModelBundle::load(&path)?;
    let snap = simulate(&g, &params, 8, 0.85, 5);
    let dist = bundle.predict(&g, &snap)?;
    println!("source 8 ranked {} of {} candidates", dist.rank_of(8), snap.infected_count());
    Ok(())
}
