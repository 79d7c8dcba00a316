//! Applications built on part-wise aggregation.

use thiserror::Error;

use crate::pa::PipelineError;
use crate::sim::SimError;

mod labels;
mod mst;

pub use labels::{component_labels, h_components};
pub use mst::{edge_rank, mst, MstOutcome};

#[derive(Debug, Error)]
pub enum AppError {
    #[error("edge {edge} has weight {weight}, above the cap n³ = {cap}")]
    WeightOutOfRange { edge: usize, weight: u64, cap: u64 },
    #[error("graph is disconnected")]
    Disconnected,
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
