//! Continuous-time SIR/SI outbreaks on static networks and labelled
//! outbreak datasets.

mod calibrate;
mod dataset;
mod io;
mod simulate;

pub use calibrate::{calibrate_duration, mean_infected_fraction, InfectedCount};
pub use dataset::{generate_dataset, record_seed, simulate_record, DurationSpec, DurationSummary, OutbreakRecord, SimDataset};
pub use io::{DATASET_MAGIC, DATASET_VERSION};
pub use simulate::{simulate, Simulator};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum NodeState {
    Susceptible = 0,
    Infectious = 1,
    Recovered = 2,
}

impl NodeState {
    pub const ALL: [NodeState; 3] = [NodeState::Susceptible, NodeState::Infectious, NodeState::Recovered];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(NodeState::Susceptible),
            1 => Some(NodeState::Infectious),
            2 => Some(NodeState::Recovered),
            _ => None,
        }
    }

    #[inline]
    pub fn is_susceptible(self) -> bool {
        self == NodeState::Susceptible
    }
}

/// Per-edge infection rate `beta` (scaled by edge weight on weighted graphs)
/// and recovery rate `mu`; `mu == 0` gives the SI model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    pub beta: f64,
    pub mu: f64,
}

impl EpidemicParams {
    pub fn new(beta: f64, mu: f64) -> Result<Self> {
        let p = Self { beta, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn si(beta: f64) -> Result<Self> {
        Self::new(beta, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Invalid(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::Invalid(format!("mu must be non-negative, got {}", self.mu)));
        }
        Ok(())
    }
}

/// Node states observed at time `time` after the outbreak started.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub states: Vec<NodeState>,
    pub time: f64,
}

impl Snapshot {
    pub fn new(states: Vec<NodeState>, time: f64) -> Self {
        Self { states, time }
    }

    pub fn node_count(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn state(&self, v: usize) -> NodeState {
        self.states[v]
    }

    /// Nodes in state I or R, ascending.
    pub fn non_susceptible(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&v| !self.states[v].is_susceptible()).collect()
    }

    pub fn count(&self, s: NodeState) -> usize {
        self.states.iter().filter(|&&x| x == s).count()
    }

    pub fn infected_count(&self) -> usize {
        self.states.len() - self.count(NodeState::Susceptible)
    }

    pub fn require_outbreak(&self) -> Result<()> {
        if self.infected_count() == 0 {
            Err(Error::Invalid("snapshot has no infectious or recovered node".into()))
        } else {
            Ok(())
        }
    }

    /// Short text form, one character per node (`S`, `I`, `R`).
    pub fn to_code_string(&self) -> String {
        self.states
            .iter()
            .map(|s| match s {
                NodeState::Susceptible => 'S',
                NodeState::Infectious => 'I',
                NodeState::Recovered => 'R',
            })
            .collect()
    }

    pub fn from_code_string(code: &str, time: f64) -> Result<Self> {
        let states = code
            .chars()
            .map(|c| match c {
                'S' | 's' => Ok(NodeState::Susceptible),
                'I' | 'i' => Ok(NodeState::Infectious),
                'R' | 'r' => Ok(NodeState::Recovered),
                other => Err(Error::Invalid(format!("unknown node state {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { states, time })
    }
}
