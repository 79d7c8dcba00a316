//! Deterministic shortcut construction over heavy paths.

use std::collections::{BTreeMap, BTreeSet};

use super::path::{path_shortcut_multi, PathJob};
use super::{ConstructError, Construction, FreezeEntry, Targets};
use crate::graph::heavy_path_decomposition;
use crate::pa::{verify_block_parameter, Mode, PaSetup};
use crate::shortcuts::Shortcut;
use crate::sim::{NodeId, Simulator};
use crate::subparts::ceil_log2;

/// Outer iterations: ⌈log₂ N⌉ + 1.
pub fn det_iteration_cap(parts: usize) -> usize {
    ceil_log2(parts) + 1
}

/// Wave of every heavy path: 1 + the largest wave among paths hanging off it
/// through light edges.
fn waves(tree: &crate::graph::RootedTree, paths: &BTreeMap<NodeId, Vec<NodeId>>) -> BTreeMap<NodeId, usize> {
    let mut path_of = vec![0; tree.n()];
    for (&id, nodes) in paths {
        for &v in nodes {
            path_of[v] = id;
        }
    }
    let mut wave: BTreeMap<NodeId, usize> = paths.keys().map(|&id| (id, 1)).collect();
    let mut order: Vec<NodeId> = paths.keys().copied().collect();
    // Deeper tops first, so every child path is final before its parent.
    order.sort_by_key(|&id| std::cmp::Reverse(tree.depth(id)));
    for id in order {
        if let Some(p) = tree.parent(id) {
            let w = wave[&id] + 1;
            let e = wave.get_mut(&path_of[p]).unwrap();
            *e = (*e).max(w);
        }
    }
    wave
}

/// Claims tree edges for the active parts by running the doubling path rule
/// bottom-up over heavy paths, wave by wave. Returns the edges (by child) per
/// active part.
pub(crate) fn claim_over_paths(
    sim: &mut Simulator<'_>,
    t: &Targets<'_>,
    hpd_paths: &BTreeMap<NodeId, Vec<NodeId>>,
    wave: &BTreeMap<NodeId, usize>,
    active: &BTreeSet<usize>,
) -> Result<BTreeMap<usize, BTreeSet<NodeId>>, ConstructError> {
    let n = t.tree.n();
    let mut sets: Vec<BTreeSet<u64>> = vec![BTreeSet::new(); n];
    for v in 0..n {
        let part = t.partition.part_of(v);
        if t.division.is_rep(v) && active.contains(&part) {
            sets[v].insert(part as u64);
        }
    }
    let mut claimed: BTreeMap<usize, BTreeSet<NodeId>> = BTreeMap::new();
    let last = wave.values().copied().max().unwrap_or(0);
    for w in 1..=last {
        let jobs: Vec<PathJob> = hpd_paths
            .iter()
            .filter(|(id, _)| wave[id] == w)
            .map(|(_, nodes)| PathJob {
                nodes: nodes.clone(),
                sets: nodes.iter().map(|&v| sets[v].clone()).collect(),
                sink_parent: t.tree.parent(*nodes.last().unwrap()),
            })
            .collect();
        let (results, received) = sim.with_phase("path-shortcut", |s| path_shortcut_multi(s, &jobs, t.c))?;
        for (job, r) in jobs.iter().zip(&results) {
            for (&v, carried) in job.nodes.iter().zip(&r.carried) {
                for &p in carried {
                    claimed.entry(p as usize).or_default().insert(v);
                }
            }
            let sink = *job.nodes.last().unwrap();
            if job.sink_parent.is_some() {
                for &p in &r.forwarded {
                    claimed.entry(p as usize).or_default().insert(sink);
                }
            }
        }
        for (v, ids) in received.into_iter().enumerate() {
            sets[v].extend(ids);
        }
    }
    Ok(claimed)
}

/// Deterministic construction: repeat claiming for the still active parts,
/// verify that each part meets over fewer than 3b blocks, freeze those.
pub fn deterministic_shortcut(sim: &mut Simulator<'_>, t: &Targets<'_>) -> Result<Construction, ConstructError> {
    let hpd = sim.with_phase("hpd", |s| heavy_path_decomposition(s, t.tree))?;
    let wave = waves(t.tree, hpd.paths());
    // Every path learns its wave by one convergecast and broadcast on T.
    sim.with_phase("hpd", |s| {
        s.charge(2 * t.tree.height() as u64, 2 * (t.tree.n() as u64).saturating_sub(1))
    });
    let parts = t.partition.num_parts();
    run_freezing(sim, t, det_iteration_cap(parts), Mode::Det, |s, active, _| {
        claim_over_paths(s, t, hpd.paths(), &wave, active)
    })
}

/// Shared outer loop: claim for active parts, verify against 3b−1, freeze.
pub(crate) fn run_freezing(
    sim: &mut Simulator<'_>,
    t: &Targets<'_>,
    cap: usize,
    mode: Mode,
    mut claim: impl FnMut(
        &mut Simulator<'_>,
        &BTreeSet<usize>,
        usize,
    ) -> Result<BTreeMap<usize, BTreeSet<NodeId>>, ConstructError>,
) -> Result<Construction, ConstructError> {
    let parts = t.partition.num_parts();
    let mut active: BTreeSet<usize> = (0..parts).collect();
    let mut frozen: Shortcut = Shortcut::empty(parts);
    let mut ledger: BTreeMap<usize, FreezeEntry> = BTreeMap::new();
    let mut active_history = vec![active.len()];
    for j in 1..=cap {
        let claimed = claim(sim, &active, j)?;
        let mut candidate = frozen.clone();
        for &p in &active {
            let edges: Vec<NodeId> = claimed.get(&p).map(|s| s.iter().copied().collect()).unwrap_or_default();
            candidate.set_edges(p, edges);
        }
        let setup = PaSetup {
            tree: t.tree,
            partition: t.partition,
            leaders: t.leaders,
            division: t.division,
            shortcut: &candidate,
            b: 3 * t.b - 1,
            mode,
            seed: t.seed ^ (j as u64).wrapping_mul(0x9E37_79B9),
        };
        let verdict = sim.with_phase("verify", |s| verify_block_parameter(s, setup))?;
        let passing: Vec<usize> = active.iter().copied().filter(|&p| verdict.part_pass[p]).collect();
        for &p in &passing {
            frozen.set_edges(p, candidate.edges(p).to_vec());
            ledger.insert(
                p,
                FreezeEntry {
                    part: p,
                    frozen_iteration: j,
                    b_actual: verdict.part_blocks[p],
                },
            );
            active.remove(&p);
        }
        active_history.push(active.len());
        if active.is_empty() {
            return Ok(Construction {
                shortcut: frozen,
                ledger,
                iterations: j,
                active_history,
            });
        }
        if passing.is_empty() && mode == Mode::Det {
            break;
        }
    }
    Err(ConstructError::TargetsInfeasible {
        active: active.into_iter().collect(),
    })
}
