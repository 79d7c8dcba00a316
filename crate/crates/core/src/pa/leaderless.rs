//! PA without known leaders: coarsen singleton clusters up to the input parts
//! by repeated star joining, then solve with the cluster roots as leaders.

use super::{pa_solve, Mode, PaError, PaSetup};
use crate::agg::AggOp;
use crate::graph::{Partition, RootedTree};
use crate::shortcuts::Shortcut;
use crate::sim::{NodeId, Simulator, Word};
use crate::subparts::{ceil_log2, subpart_division_det, SubPartDivision, C_IT};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coarsening {
    /// Leader of each part, the root of its single coarse cluster.
    pub leaders: Vec<NodeId>,
    pub iterations: usize,
}

/// Merges clusters inside each part until one cluster per part remains.
pub fn coarsen(sim: &mut Simulator<'_>, partition: &Partition) -> Result<Coarsening, PaError> {
    let g = sim.graph();
    let (clusters, stats) = sim.with_phase("coarsen", |s| subpart_division_det(s, g, partition, usize::MAX))?;
    let mut leaders = Vec::with_capacity(partition.num_parts());
    for i in 0..partition.num_parts() {
        let reps = clusters.reps_of_part(partition, i);
        if reps.len() != 1 {
            return Err(PaError::CoarseningIncomplete { iterations: C_IT * ceil_log2(g.n()).max(1) });
        }
        leaders.push(reps[0]);
    }
    Ok(Coarsening { leaders, iterations: stats.iterations })
}

/// Everything [`PaSetup`] holds except the leaders.
#[derive(Clone, Copy)]
pub struct LeaderlessSetup<'a> {
    pub tree: &'a RootedTree,
    pub partition: &'a Partition,
    pub division: &'a SubPartDivision,
    pub shortcut: &'a Shortcut,
    pub b: usize,
    pub mode: Mode,
    pub seed: u64,
}

pub fn pa_solve_leaderless(
    sim: &mut Simulator<'_>,
    setup: LeaderlessSetup<'_>,
    values: &[Word],
    op: AggOp,
) -> Result<Vec<Word>, PaError> {
    let c = coarsen(sim, setup.partition)?;
    let LeaderlessSetup { tree, partition, division, shortcut, b, mode, seed } = setup;
    let full = PaSetup { tree, partition, leaders: &c.leaders, division, shortcut, b, mode, seed };
    pa_solve(sim, full, values, op)
}
