//! Random search over a reduced architecture space.
//!
//!     cargo run --release --example tune_architecture

use sourcedet::epidemics::{generate_dataset, DurationSpec, EpidemicParams};
use sourcedet::netgraph::Graph;
use sourcedet::nnet::{tune, SearchSpace, TrainConfig};

fn main() -> sourcedet::Result<()> {
    let g = Graph::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))?;
    let ds = generate_dataset(&g, &EpidemicParams::new(1.3, 1.0)?, 60, DurationSpec::Fixed(0.85), 1)?;
    let space = SearchSpace {
        n_mp: vec![2, 3, 4],
        mp_dim: vec![16, 32],
        ..SearchSpace::default()
    };
    let cfg = TrainConfig {
        max_epochs: 15,
        ..TrainConfig::default()
    };
    let res = tune(&space, &ds, &g, &cfg, 4, 0)?;
    print!("{}", res.to_csv());
    println!("best: {}", serde_json::to_string(&res.best)?);
    Ok(())
}
