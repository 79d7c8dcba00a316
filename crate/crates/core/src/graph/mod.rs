//! Communication graphs, spanning trees, heavy path decompositions and
//! generators.

pub mod gen;
mod hpd;
pub mod io;
mod network;
mod tree;

pub use gen::{
    gen_grid_with_apex, gen_random_connected, gen_random_connected_partition, gen_random_weighted, GridWithApex,
};
pub use hpd::{heavy_path_decomposition, hpd_oracle, HeavyPathDecomposition};
pub use network::{NetworkGraph, Partition, Weight};
pub use tree::{bfs_tree_oracle, build_bfs_tree, BuildError, RootedTree};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("node {0} out of range for n = {1}")]
    NodeOutOfRange(usize, usize),
    #[error("self-loop at {0}")]
    SelfLoop(usize),
    #[error("parallel edge {0}-{1}")]
    ParallelEdge(usize, usize),
    #[error("either all edges carry weights or none do")]
    MixedWeights,
    #[error("weight {0} outside [1, n^3]")]
    BadWeight(u64),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("cannot make {0} parts from {1} nodes")]
    InfeasiblePartCount(usize, usize),
    #[error("partition covers {0} nodes, graph has {1}")]
    PartitionSize(usize, usize),
    #[error("a part does not induce a connected subgraph")]
    DisconnectedPart,
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("line {0}: {1}")]
    Parse(usize, String),
}
