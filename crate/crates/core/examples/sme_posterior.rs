//! Soft-margin estimator: bootstrap choice of the convergence parameter and
//! the resulting posterior.
//!
//!     cargo run --release --example sme_posterior

use sourcedet::epidemics::{generate_dataset, simulate, DurationSpec, EpidemicParams};
use sourcedet::estimators::{SmeConfig, SmeIndex};
use sourcedet::netgraph::Graph;

fn main() -> sourcedet::Result<()> {
    let g = Graph::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))?;
    let params = EpidemicParams::new(1.3, 1.0)?;
    let ds = generate_dataset(&g, &params, 500, DurationSpec::Fixed(0.85), 11)?;
    let index = SmeIndex::new(&ds)?;
    let cfg = SmeConfig::default();

    let source = 16;
    let snap = simulate(&g, &params, source, 0.85, 99);
    let a = index.select_a(&snap, &cfg, 0)?;
    let post = index.posterior(&snap, &cfg, 0)?;
    let p = post.probs()?;
    println!("a = {a}, true source {} has posterior {:.3} (rank {})", g.label(source), p[source], post.rank_of(source));
    for v in post.ranking().into_iter().take(5) {
        println!("  {:>3} {:.3}", g.label(v), p[v]);
    }
    Ok(())
}
