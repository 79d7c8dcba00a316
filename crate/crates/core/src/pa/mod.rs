//! Part-wise aggregation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shortcuts::RouteError;
use crate::sim::SimError;
use crate::subparts::DivisionError;

mod baseline;
mod flow;
mod leaderless;
mod pipeline;
mod solve;
mod verify;

pub use baseline::naive_block_aggregation_baseline;
pub use leaderless::{coarsen, pa_solve_leaderless, Coarsening, LeaderlessSetup};
pub use pipeline::{pa_pipeline, PipelineError, PipelineOutcome};
pub use solve::{beta, pa_solve, spread_leader_ids, spread_trace, PaSetup, Spread, C_BETA, K_M, K_PA};
pub use verify::{verify_block_parameter, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Det,
    Rand,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Det => "det",
            Mode::Rand => "rand",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "det" => Ok(Mode::Det),
            "rand" => Ok(Mode::Rand),
            other => Err(format!("unknown mode `{other}` (expected det or rand)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PaError {
    #[error("part {part}: some node never received its leader's message; the shortcut is weaker than assumed")]
    ShortcutTooWeak { part: usize },
    #[error("coarsening did not reach the input partition within {iterations} iterations")]
    CoarseningIncomplete { iterations: usize },
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Division(#[from] DivisionError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
