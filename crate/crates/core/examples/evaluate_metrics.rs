//! Scores estimators on a held-out suite and aggregates repeated runs.
//!
//!     cargo run --release --example evaluate_metrics

use sourcedet::epidemics::{generate_dataset, DurationSpec, EpidemicParams, Snapshot};
use sourcedet::estimators::{mcmf_state_probs, BetweennessEstimator, McmfEstimator, RandomEstimator, SourceEstimator};
use sourcedet::evalkit::{aggregate_runs, distance_matrix, evaluate_suite, AggregateReport, MetricsReport};
use sourcedet::netgraph::Graph;

fn main() -> sourcedet::Result<()> {
    let g = Graph::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))?;
    let params = EpidemicParams::new(1.3, 1.0)?;
    let distances = distance_matrix(&g)?;

    let mut reports: Vec<Vec<MetricsReport>> = vec![Vec::new(); 3];
    for run in 0..3u64 {
        let train = generate_dataset(&g, &params, 200, DurationSpec::Fixed(0.85), 100 + run)?;
        let test = generate_dataset(&g, &params, 20, DurationSpec::Fixed(0.85), 200 + run)?;
        let cases: Vec<(Snapshot, usize)> = test.records.iter().map(|r| (r.snapshot.clone(), r.source)).collect();
        let estimators: [Box<dyn SourceEstimator>; 3] = [
            Box::new(McmfEstimator(mcmf_state_probs(&train)?)),
            Box::new(BetweennessEstimator(&g)),
            Box::new(RandomEstimator),
        ];
        for (i, est) in estimators.iter().enumerate() {
            let outcomes = evaluate_suite(est.as_ref(), &cases, &distances, run)?;
            reports[i].push(MetricsReport::from_outcomes(est.name(), &outcomes, 5)?);
        }
    }
    println!("{}", MetricsReport::csv_header());
    for r in reports.iter().flatten() {
        println!("{}", r.csv_row("karate", 0));
    }
    println!("\n{}", AggregateReport::csv_header());
    for r in &reports {
        println!("{}", aggregate_runs(r)?.csv_row("karate"));
    }
    Ok(())
}
