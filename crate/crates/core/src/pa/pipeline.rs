//! End-to-end PA: BFS tree, leaders, sub-parts, shortcut search, solve.

use thiserror::Error;

use super::leaderless::coarsen;
use super::{pa_solve, Mode, PaError, PaSetup};
use crate::agg::AggOp;
use crate::construction::{doubling_search, ConstructError, Targets};
use crate::graph::{build_bfs_tree, BuildError, Partition};
use crate::sim::{NodeId, Simulator, Word};
use crate::subparts::{subpart_division_det, subpart_division_random, DivisionError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Tree(#[from] BuildError),
    #[error(transparent)]
    Division(#[from] DivisionError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Pa(#[from] PaError),
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    /// Aggregate of each node's part.
    pub values: Vec<Word>,
    pub leaders: Vec<NodeId>,
    pub tree_height: usize,
    /// Targets found by the doubling search.
    pub b: usize,
    pub c: usize,
    /// Measured congestion of the shortcut used.
    pub congestion: usize,
    pub representatives: usize,
}

pub fn pa_pipeline(
    sim: &mut Simulator<'_>,
    partition: &Partition,
    values: &[Word],
    op: AggOp,
    mode: Mode,
    seed: u64,
) -> Result<PipelineOutcome, PipelineError> {
    let g = sim.graph();
    let tree = sim.with_phase("bfs", |s| build_bfs_tree(s, 0))?;
    let dt = tree.height().max(1);
    let leaders = coarsen(sim, partition)?.leaders;
    let (division, _) = sim.with_phase("division", |sim| match mode {
        Mode::Det => subpart_division_det(sim, g, partition, dt),
        Mode::Rand => subpart_division_random(sim, g, partition, &leaders, dt, seed),
    })?;
    let targets = Targets { tree: &tree, partition, leaders: &leaders, division: &division, b: 1, c: 1, seed };
    let found = doubling_search(sim, &targets, mode)?;
    let shortcut = &found.construction.shortcut;
    let setup = PaSetup {
        tree: &tree,
        partition,
        leaders: &leaders,
        division: &division,
        shortcut,
        b: 3 * found.b - 1,
        mode,
        seed,
    };
    let out = pa_solve(sim, setup, values, op)?;
    Ok(PipelineOutcome {
        values: out,
        leaders,
        tree_height: tree.height(),
        b: found.b,
        c: found.c,
        congestion: shortcut.congestion().0,
        representatives: division.total_reps(),
    })
}
