//! Influence estimation for progressive diffusion processes on networks.
//!
//! The crate computes expected spread (the influence function) for the
//! Independent Cascade (IC) and stochastic Linear Threshold (LT) models:
//!
//! * [`dmp`]: dynamic message-passing estimators, finite horizon and fixed point.
//! * [`lt`]: message-passing for the stochastic LT model.
//! * [`mc`]: Monte-Carlo reference simulations with reproducible per-run streams.
//! * [`oracle`]: exact marginals by live-edge enumeration on small graphs.
//! * [`bounds`]: girth exactness certificates and spanning-tree lower bounds.
//! * [`generate`]: synthetic graph families and seed sets.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in the `dmpest` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod dmp;
pub mod error;
pub mod generate;
pub mod graph;
pub mod lt;
pub mod mc;
pub mod oracle;

pub use error::{Error, Result};
pub use graph::{
    influence_from_marginals, ArcId, DirectedGraph, EdgeMode, GraphBuilder, Horizon,
    InitialCondition, MarginalReport, NodeId,
};
