use std::collections::BTreeMap;

use thiserror::Error;

use super::star_join::{star_joining_det, ForestComm};
use super::SubPartDivision;
use crate::agg::{AggOp, Item};
use crate::graph::{NetworkGraph, Partition};
use crate::sim::{exchange, NodeId, Payload, SimError, Simulator, Word};
use crate::treecast::{all_reduce_on, merge_along, Forest};

/// Iteration cap multiplier: C_it·⌈log₂ n⌉ merging iterations.
pub const C_IT: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivisionError {
    #[error("sub-part {0} is incomplete but has no edge leaving it inside a part of size ≥ threshold")]
    Stalled(NodeId),
    #[error("coverage failed for part {0} after the retry")]
    CoverageFailure(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DivisionStats {
    pub iterations: usize,
    /// Incomplete sub-parts left inside parts of size ≥ threshold.
    pub leftover_incomplete: usize,
    pub retries: usize,
}

pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

/// Deterministic division: start from singletons and repeatedly merge
/// incomplete sub-parts by star joinings, fixing a sub-part as complete once
/// it has at least `threshold` nodes.
pub fn subpart_division_det(
    sim: &mut Simulator<'_>,
    g: &NetworkGraph,
    partition: &Partition,
    threshold: usize,
) -> Result<(SubPartDivision, DivisionStats), DivisionError> {
    let n = g.n();
    let mut forest = Forest::singletons(n);
    let mut complete: BTreeMap<NodeId, bool> = (0..n).map(|v| (v, threshold <= 1)).collect();
    // What each node last told its part neighbours, and what it knows of them.
    let mut told: Vec<Option<(NodeId, bool)>> = vec![None; n];
    let mut known: Vec<BTreeMap<NodeId, (NodeId, bool)>> = vec![BTreeMap::new(); n];
    let nn = n as Word;
    let mut stats = DivisionStats::default();
    let cap = C_IT * ceil_log2(n).max(1);

    for _ in 0..cap {
        // Share (sub-part id, complete) with part neighbours when it changed.
        let mut sends = Vec::new();
        for v in 0..n {
            let mine = (forest.root_of(v), complete[&forest.root_of(v)]);
            if told[v] != Some(mine) {
                told[v] = Some(mine);
                for &w in g.neighbors(v) {
                    if partition.part_of(w) == partition.part_of(v) {
                        sends.push((v, w, Payload::from_slice(&[mine.0 as Word, mine.1 as Word])));
                    }
                }
            }
        }
        let inbox = exchange(sim, sends)?;
        for (v, msgs) in inbox.into_iter().enumerate() {
            for e in msgs {
                known[v].insert(e.src, (e.payload[0] as NodeId, e.payload[1] == 1));
            }
        }
        // Candidate exit edge per node: prefer incomplete neighbours, then the
        // smallest endpoint pair.
        let mut vals = vec![AggOp::Min.identity(); n];
        for v in 0..n {
            let own = forest.root_of(v);
            if complete[&own] {
                continue;
            }
            for (&w, &(cw, done)) in &known[v] {
                if cw != own {
                    let (a, b) = (v.min(w) as Word, v.max(w) as Word);
                    let key = (done as Word) * nn * nn + a * nn + b;
                    vals[v] = AggOp::Min.combine(vals[v], AggOp::Min.lift(v, key));
                }
            }
        }
        let snapshot = complete.clone();
        let best = all_reduce_on(sim, &forest, &vals, AggOp::Min, |r| !snapshot[&r])?;
        let mut edges = BTreeMap::new();
        for v in 0..n {
            let r = forest.root_of(v);
            if complete[&r] || best[v].word == Word::MAX {
                continue;
            }
            let key = best[v].word % (nn * nn);
            let (a, b) = ((key / nn) as NodeId, (key % nn) as NodeId);
            if v == a || v == b {
                let w = if v == a { b } else { a };
                if forest.root_of(w) != r {
                    edges.insert(r, (v, w));
                }
            }
        }
        if edges.is_empty() {
            break;
        }
        stats.iterations += 1;
        let clusters: Vec<NodeId> = forest.roots();
        let sj = star_joining_det(sim, &mut ForestComm(&forest), &clusters, &edges)?;
        let joins: Vec<(NodeId, NodeId)> = sj.joins.values().copied().collect();
        let old = forest.clone();
        forest = merge_along(sim, &forest, &joins)?;
        // Receivers keep their root; recompute completeness of incomplete ones.
        let mut next: BTreeMap<NodeId, bool> = BTreeMap::new();
        for r in forest.roots() {
            next.insert(r, complete[&r]);
        }
        let ones: Vec<Item> = (0..n).map(|v| AggOp::Sum.lift(v, 1)).collect();
        let snap = next.clone();
        let sizes = all_reduce_on(sim, &forest, &ones, AggOp::Sum, |r| !snap[&r])?;
        for (&r, done) in next.iter_mut() {
            if !*done && sizes[r].word as usize >= threshold {
                *done = true;
            }
        }
        let _ = old;
        complete = next;
    }

    for r in forest.roots() {
        if complete[&r] {
            continue;
        }
        let part = partition.part_of(r);
        if partition.size(part) >= threshold {
            let members: Vec<NodeId> = forest.clusters()[&r].clone();
            let has_exit = members.iter().any(|&v| {
                g.neighbors(v)
                    .iter()
                    .any(|&w| partition.part_of(w) == part && forest.root_of(w) != r)
            });
            if !has_exit {
                return Err(DivisionError::Stalled(r));
            }
            stats.leftover_incomplete += 1;
        }
    }
    Ok((SubPartDivision::from_forest(forest), stats))
}
