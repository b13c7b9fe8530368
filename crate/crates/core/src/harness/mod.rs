//! Experiment orchestration: key-value configs, a content-addressed stage
//! cache, the benchmark/detectability/scaling/uncertain-duration/timing
//! experiments and their CSV output.

mod cache;
mod config;
mod experiments;
mod output;

pub use cache::StageCache;
pub use config::{ExperimentConfig, Method, TMode};
pub use experiments::{
    outbreak_size_breakdown, run_benchmark, run_detectability, run_scaling, run_timing, run_uncertain_t, BenchmarkResult,
    DetectabilityPoint, DetectabilityResult, GridCell, GridResult, MethodRun, Prepared, TimingResult, TimingRow, UncertainResult,
};
pub use output::{write_text, PlotRow};

use std::path::Path;

use crate::error::Result;
use crate::netgraph::{graph_stats, Graph};

/// Topology table, one row per edge list, labelled by file stem.
pub fn stats_csv(paths: &[impl AsRef<Path>]) -> Result<String> {
    let mut out = String::from("network,nodes,edges,avg_degree,avg_shortest_path,diameter,avg_clustering\n");
    for p in paths {
        let p = p.as_ref();
        let s = graph_stats(&Graph::load(p)?)?;
        let name = p.file_stem().map_or("?".into(), |s| s.to_string_lossy().into_owned());
        out += &format!(
            "{name},{},{},{:.2},{:.2},{},{:.2}\n",
            s.node_count, s.edge_count, s.avg_degree, s.avg_shortest_path, s.diameter, s.avg_clustering
        );
    }
    Ok(out)
}
