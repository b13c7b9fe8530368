//! Observation time giving a target mean infected fraction.
//!
//!     cargo run --release --example calibrate_duration

use sourcedet::epidemics::{calibrate_duration, mean_infected_fraction, EpidemicParams, InfectedCount};
use sourcedet::netgraph::Graph;

fn main() -> sourcedet::Result<()> {
    let g = Graph::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))?;
    let params = EpidemicParams::new(1.3, 1.0)?;
    for target in [0.2, 0.4] {
        let t = calibrate_duration(&g, &params, target, 5000, InfectedCount::NonSusceptible)?;
        let f = mean_infected_fraction(&g, &params, t, 5000, InfectedCount::NonSusceptible);
        println!("target {target}: T = {t:.4}, measured fraction {f:.3}");
    }

    let t = calibrate_duration(&g, &params, 0.2, 5000, InfectedCount::InfectiousOnly)?;
    println!("20% currently infectious at T = {t:.4}");

    let si = EpidemicParams::si(1.0)?;
    let t = calibrate_duration(&g, &si, 0.2, 5000, InfectedCount::NonSusceptible)?;
    println!("SI model, 20% infected at T = {t:.4}");
    Ok(())
}
