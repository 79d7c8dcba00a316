//! Doubling search over (b, c) targets, and the trivial shortcut.

use super::{deterministic_shortcut, randomized_shortcut, ConstructError, Construction, Targets};
use crate::graph::{Partition, RootedTree};
use crate::pa::Mode;
use crate::shortcuts::Shortcut;
use crate::sim::Simulator;

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub b: usize,
    pub c: usize,
    pub construction: Construction,
    /// (b, c) pairs tried before and including the successful one.
    pub probes: Vec<(usize, usize)>,
}

/// Doubling grid b, c ∈ {1, 2, 4, …} up to the first power of two ≥ n,
/// ordered by b + log₂ c, then by b.
pub fn doubling_grid(n: usize) -> Vec<(usize, usize)> {
    let top = n.max(1).next_power_of_two();
    let powers: Vec<usize> = std::iter::successors(Some(1usize), |&x| (x < top).then_some(2 * x)).collect();
    let mut grid: Vec<(usize, usize)> =
        powers.iter().flat_map(|&b| powers.iter().map(move |&c| (b, c))).collect();
    grid.sort_by_key(|&(b, c)| (b + c.trailing_zeros() as usize, b));
    grid
}

/// Tries the doubling grid with the given construction mode; `t.b` and
/// `t.c` are ignored.
pub fn doubling_search(sim: &mut Simulator<'_>, t: &Targets<'_>, mode: Mode) -> Result<SearchOutcome, ConstructError> {
    let mut probes = Vec::new();
    for (b, c) in doubling_grid(t.tree.n()) {
        probes.push((b, c));
        let probe = Targets { b, c, ..*t };
        let res = sim.with_phase("search", |s| match mode {
            Mode::Det => deterministic_shortcut(s, &probe),
            Mode::Rand => randomized_shortcut(s, &probe),
        });
        match res {
            Ok(construction) => return Ok(SearchOutcome { b, c, construction, probes }),
            Err(ConstructError::TargetsInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(ConstructError::SearchExhausted)
}

/// Parts with at least √n nodes get every tree edge; smaller parts get the
/// tree edges with both endpoints inside the part.
pub fn trivial_shortcut(tree: &RootedTree, partition: &Partition) -> Shortcut {
    let n = tree.n();
    let sets = (0..partition.num_parts())
        .map(|i| {
            let members = partition.members(i);
            if members.len() * members.len() >= n {
                (0..n).filter(|&v| tree.parent(v).is_some()).collect()
            } else {
                members
                    .iter()
                    .copied()
                    .filter(|&v| tree.parent(v).is_some_and(|p| partition.part_of(p) == i))
                    .collect()
            }
        })
        .collect();
    Shortcut::from_sets(sets)
}
