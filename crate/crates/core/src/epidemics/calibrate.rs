use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EpidemicParams, NodeState, Simulator};
use crate::error::{Error, Result};
use crate::netgraph::Graph;
use crate::rng::{derive_seed, rng_from_seed};

/// Which nodes count as "infected" when measuring outbreak size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InfectedCount {
    /// Infectious or recovered.
    #[default]
    NonSusceptible,
    InfectiousOnly,
}

const CALIBRATION_SEED: u64 = 0x5eed_ca1b;
const TOLERANCE: f64 = 0.02;

/// Mean infected fraction at duration `t` over `n_probe` outbreaks with
/// sources cycling through all nodes. The seeds are fixed, so repeated
/// calls at different `t` use common random numbers.
pub fn mean_infected_fraction(g: &Graph, params: &EpidemicParams, t: f64, n_probe: usize, counting: InfectedCount) -> f64 {
    let n = g.node_count();
    let total: usize = (0..n_probe)
        .into_par_iter()
        .map_init(
            || Simulator::new(g),
            |sim, k| {
                let mut rng = rng_from_seed(derive_seed(CALIBRATION_SEED, k as u64));
                let s = sim.run(params, k % n, t, &mut rng);
                match counting {
                    InfectedCount::NonSusceptible => s.infected_count(),
                    InfectedCount::InfectiousOnly => s.count(NodeState::Infectious),
                }
            },
        )
        .sum();
    total as f64 / (n_probe as f64 * n as f64)
}

/// Finds an observation time whose mean infected fraction is within 0.02
/// of `target_fraction`, by bracketing on a doubling grid and bisecting.
pub fn calibrate_duration(
    g: &Graph,
    params: &EpidemicParams,
    target_fraction: f64,
    n_probe: usize,
    counting: InfectedCount,
) -> Result<f64> {
    params.validate()?;
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(Error::Invalid(format!("target fraction must lie in (0, 1), got {target_fraction}")));
    }
    if n_probe == 0 {
        return Err(Error::Invalid("n_probe must be positive".into()));
    }
    let f = |t: f64| mean_infected_fraction(g, params, t, n_probe, counting);

    let eps = 1e-6;
    let floor = f(eps);
    if (floor - target_fraction).abs() <= TOLERANCE {
        return Ok(eps);
    }
    if floor > target_fraction {
        return Err(Error::Invalid(format!(
            "target {target_fraction} is below the single-source fraction {floor:.4}"
        )));
    }

    // bracket: first grid point whose fraction reaches the target
    let mut lo = eps;
    let mut hi = None;
    let mut best = floor;
    let mut t = 1.0 / 1024.0;
    for _ in 0..40 {
        let v = f(t);
        best = best.max(v);
        if v >= target_fraction {
            hi = Some((t, v));
            break;
        }
        lo = t;
        t *= 2.0;
    }
    let Some((mut hi, mut f_hi)) = hi else {
        if (best - target_fraction).abs() <= TOLERANCE {
            return Ok(lo);
        }
        return Err(Error::Unreachable {
            target: target_fraction,
            max_fraction: best,
        });
    };
    if (f_hi - target_fraction).abs() <= TOLERANCE {
        return Ok(hi);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v - target_fraction).abs() <= TOLERANCE {
            return Ok(mid);
        }
        if v < target_fraction {
            lo = mid;
        } else {
            hi = mid;
            f_hi = v;
        }
    }
    Err(Error::Unreachable {
        target: target_fraction,
        max_fraction: f_hi,
    })
}
