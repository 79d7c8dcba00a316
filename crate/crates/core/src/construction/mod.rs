//! Shortcut construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Partition, RootedTree};
use crate::pa::PaError;
use crate::shortcuts::Shortcut;
use crate::sim::{NodeId, SimError};
use crate::subparts::SubPartDivision;

mod det;
mod path;
mod rand;
mod search;

pub use det::{det_iteration_cap, deterministic_shortcut};
pub use rand::{rand_iteration_cap, randomized_shortcut};
pub use search::{doubling_grid, doubling_search, trivial_shortcut, SearchOutcome};
pub use path::{path_round_budget, path_shortcut, path_shortcut_multi, PathJob, PathResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("parts {active:?} are still active after the last iteration; the targets are below what the graph admits")]
    TargetsInfeasible { active: Vec<usize> },
    #[error("no (b, c) on the doubling grid succeeded")]
    SearchExhausted,
    #[error(transparent)]
    Pa(#[from] PaError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Inputs shared by the constructions.
#[derive(Clone, Copy)]
pub struct Targets<'a> {
    pub tree: &'a RootedTree,
    pub partition: &'a Partition,
    pub leaders: &'a [NodeId],
    pub division: &'a SubPartDivision,
    pub b: usize,
    pub c: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreezeEntry {
    pub part: usize,
    pub frozen_iteration: usize,
    pub b_actual: u64,
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub shortcut: Shortcut,
    pub ledger: BTreeMap<usize, FreezeEntry>,
    pub iterations: usize,
    /// Number of active parts before the first and after each iteration.
    pub active_history: Vec<usize>,
}

impl Construction {
    pub fn ledger_json(&self) -> String {
        let entries: Vec<&FreezeEntry> = self.ledger.values().collect();
        serde_json::to_string_pretty(&entries).expect("ledger serializes")
    }
}
