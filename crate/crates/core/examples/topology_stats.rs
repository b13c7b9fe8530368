//! Topology table for the shipped edge lists.
//!
//!     cargo run --example topology_stats

use sourcedet::netgraph::{betweenness_centrality, graph_stats, jordan_center, Graph};

fn main() -> sourcedet::Result<()> {
    let g = Graph::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))?;
    let s = graph_stats(&g)?;
    println!("{}", serde_json::to_string_pretty(&s)?);

    let bc = betweenness_centrality(&g);
    let top = (0..g.node_count()).max_by(|&a, &b| bc[a].total_cmp(&bc[b])).unwrap();
    println!("highest betweenness: node {} ({:.3})", g.label(top), bc[top]);
    let centers: Vec<&str> = jordan_center(&g)?.into_iter().map(|v| g.label(v)).collect();
    println!("jordan center: {centers:?}");
    Ok(())
}
