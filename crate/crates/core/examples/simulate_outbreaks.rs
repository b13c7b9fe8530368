//! Balanced SIR dataset on Karate, saved and reloaded through the binary codec.
//!
//!     cargo run --release --example simulate_outbreaks

use sourcedet::epidemics::{generate_dataset, simulate, DurationSpec, EpidemicParams, SimDataset};
use sourcedet::netgraph::Graph;

fn main() -> sourcedet::Result<()> {
    let g = Graph::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))?;
    let params = EpidemicParams::new(1.3, 1.0)?;

    let one = simulate(&g, &params, 0, 0.85, 42);
    println!("one outbreak from node 0: {}", one.to_code_string());

    let ds = generate_dataset(&g, &params, 200, DurationSpec::Fixed(0.85), 7)?;
    println!("{} records, {} per source", ds.records.len(), ds.n_per_source);
    for s in ds.summary(1) {
        println!(
            "mean infectious fraction {:.3}, recovered {:.3}",
            s.mean_infectious_fraction, s.mean_recovered_fraction
        );
    }

    // a smaller dataset from the same seed is a per-source prefix of this one
    let small = generate_dataset(&g, &params, 50, DurationSpec::Fixed(0.85), 7)?;
    assert_eq!(small, ds.prefix(50)?);

    let path = std::env::temp_dir().join("karate_example.sdds");
    ds.save(&path)?;
    let back = SimDataset::load(&path, Some(&g))?;
    assert_eq!(back, ds);
    println!("saved to {} (hash {})", path.display(), &ds.content_hash()[..12]);

    let uncertain = generate_dataset(&g, &params, 50, DurationSpec::uncertain(0.85), 7)?;
    let mean_t = uncertain.records.iter().map(|r| r.duration()).sum::<f64>() / uncertain.records.len() as f64;
    println!("uniform durations on (0, 4T*]: mean {mean_t:.3}");
    Ok(())
}
