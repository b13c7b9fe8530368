//! Random, Jordan-center and betweenness rankings for one snapshot.
//!
//!     cargo run --example heuristic_estimators

use sourcedet::epidemics::{simulate, EpidemicParams};
use sourcedet::estimators::{betweenness_estimator, jordan_estimator, random_estimator, SourceDistribution};
use sourcedet::netgraph::Graph;

fn show(name: &str, d: &SourceDistribution, g: &Graph, source: usize) {
    let top: Vec<&str> = d.ranking().into_iter().take(5).map(|v| g.label(v)).collect();
    println!("{name:<12} top-5 {top:?}  rank of true source {}", d.rank_of(source));
}

fn main() -> sourcedet::Result<()> {
    let g = Graph::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))?;
    let params = EpidemicParams::new(1.3, 1.0)?;
    let source = 5;
    let snap = simulate(&g, &params, source, 0.85, 3);
    println!("snapshot {} ({} infected), source {}", snap.to_code_string(), snap.infected_count(), g.label(source));

    show("Random", &random_estimator(&snap, 1)?, &g, source);
    show("Jordan", &jordan_estimator(&g, &snap)?, &g, source);
    show("Betweenness", &betweenness_estimator(&g, &snap)?, &g, source);
    Ok(())
}
