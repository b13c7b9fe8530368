//! Single-source epidemic source detection on static networks.
//!
//! The crate covers the whole pipeline: event-driven SIR/SI simulation of
//! labelled outbreaks ([`epidemics`]), a message-passing graph neural
//! network trained on them ([`nnet`]), classical and likelihood-based
//! benchmark estimators ([`estimators`]), evaluation metrics ([`evalkit`])
//! and experiment orchestration ([`harness`]).
//!
//! See the `examples/` directory for one runnable program per capability.

mod codec;
pub mod epidemics;
pub mod estimators;
pub mod evalkit;
pub mod harness;
pub mod error;
pub mod netgraph;
pub mod nnet;
pub mod rng;

pub use error::{Error, Result};
