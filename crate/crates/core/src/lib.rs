//! Message-efficient part-wise aggregation on a simulated CONGEST network.

pub mod agg;
pub mod apps;
pub mod construction;
pub mod graph;
pub mod oracle;
pub mod pa;
pub mod shortcuts;
pub mod sim;
pub mod subparts;
pub mod treecast;
