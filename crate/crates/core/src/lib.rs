//! Simulation and exact analysis of asynchronous quantized consensus on
//! static connected graphs.
//!
//! The crate covers the gossip protocol itself ([`consensus`]), the random
//! walk a single value performs under it ([`walk`]), the electric-network
//! view of that walk ([`electric`]), hitting and meeting times of one or two
//! walkers ([`chain`]), and the experiment drivers behind the `qcons` CLI
//! ([`experiments`]).

pub mod chain;
pub mod consensus;
pub mod electric;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod linalg;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{build_topology, load_edge_list, Graph, TopologyKind, TopologySpec};
pub use walk::{TransitionKernel, WalkKind};
