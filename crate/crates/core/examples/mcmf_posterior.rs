//! Mean-field posterior from per-source node-state frequencies.
//!
//!     cargo run --release --example mcmf_posterior

use sourcedet::epidemics::{generate_dataset, simulate, DurationSpec, EpidemicParams, NodeState};
use sourcedet::estimators::{mcmf_posterior, mcmf_state_probs, StateProbTable};
use sourcedet::netgraph::Graph;

fn main() -> sourcedet::Result<()> {
    let g = Graph::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))?;
    let params = EpidemicParams::new(1.3, 1.0)?;
    let ds = generate_dataset(&g, &params, 500, DurationSpec::Fixed(0.85), 11)?;
    let table = mcmf_state_probs(&ds)?;
    println!(
        "P(node 33 infectious | source 0) = {:.3}",
        table.prob(0, g.index_of("33").unwrap_or(32), NodeState::Infectious)
    );

    let path = std::env::temp_dir().join("karate_example.sdpt");
    table.save(&path)?;
    let table = StateProbTable::load(&path, Some(&g))?;

    let source = 16;
    let snap = simulate(&g, &params, source, 0.85, 99);
    let post = mcmf_posterior(&snap, &table)?;
    let p = post.probs()?;
    println!("true source {} has posterior {:.3} (rank {})", g.label(source), p[source], post.rank_of(source));
    for v in post.ranking().into_iter().take(5) {
        println!("  {:>3} {:.3}", g.label(v), p[v]);
    }
    Ok(())
}
