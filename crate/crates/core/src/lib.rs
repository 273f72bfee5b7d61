//! Square Hamilton cycles in dense subgraphs of random graphs.

pub mod absorber;
pub mod adversary;
pub mod cli;
pub mod connector;
pub mod error;
pub mod gadgets;
pub mod graph;
pub mod hamiltonian;
pub mod matching;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{Graph, Pair, Vertex};
