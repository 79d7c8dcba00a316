//! Borůvka's algorithm with one PA per phase for the lightest outgoing edge.

use smallvec::smallvec;

use super::labels::component_labels;
use super::AppError;
use crate::agg::AggOp;
use crate::graph::{NetworkGraph, Partition};
use crate::pa::{pa_pipeline, Mode};
use crate::sim::{exchange, NodeId, Simulator, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MstOutcome {
    /// Sorted edge indices of the tree.
    pub edges: Vec<usize>,
    pub phases: usize,
    /// Fragment count before the first phase and after each phase.
    pub fragments: Vec<usize>,
}

/// Comparison key (w·n + min)·n + max; unweighted edges weigh 1.
pub fn edge_rank(g: &NetworkGraph, e: usize) -> Result<Word, AppError> {
    let n = g.n() as u64;
    let cap = n.saturating_mul(n).saturating_mul(n);
    let w = g.weight(e).unwrap_or(1);
    if w > cap {
        return Err(AppError::WeightOutOfRange { edge: e, weight: w, cap });
    }
    let (u, v) = g.edges()[e];
    Ok((w * n + u.min(v) as u64) * n + u.max(v) as u64)
}

fn decode(g: &NetworkGraph, key: Word) -> usize {
    let n = g.n() as u64;
    let hi = (key % n) as NodeId;
    let lo = ((key / n) % n) as NodeId;
    g.edge_index(lo, hi).expect("key names an edge")
}

pub fn mst(sim: &mut Simulator<'_>, mode: Mode, seed: u64) -> Result<MstOutcome, AppError> {
    let g = sim.graph();
    let n = g.n();
    let ranks: Vec<Word> = (0..g.m()).map(|e| edge_rank(g, e)).collect::<Result<_, _>>()?;
    let mut fragment: Vec<NodeId> = (0..n).collect();
    let mut in_tree = vec![false; g.m()];
    let mut fragments = vec![n];
    let mut phases = 0;
    while fragments.last().is_some_and(|&f| f > 1) {
        phases += 1;
        let sends = (0..n)
            .flat_map(|v| g.neighbors(v).iter().map(move |&u| (v, u)))
            .map(|(v, u)| (v, u, smallvec![fragment[v] as Word]))
            .collect();
        let inbox = sim.with_phase("mst-fragment", |s| exchange(s, sends))?;
        let best: Vec<Word> = (0..n)
            .map(|v| {
                inbox[v]
                    .iter()
                    .filter(|m| m.payload[0] as NodeId != fragment[v])
                    .map(|m| ranks[g.edge_index(v, m.src).expect("neighbour")])
                    .min()
                    .unwrap_or(Word::MAX)
            })
            .collect();
        let parts = Partition::from_labels(&fragment.iter().map(|&f| f as u64).collect::<Vec<_>>());
        let chosen = pa_pipeline(sim, &parts, &best, AggOp::Min, mode, seed ^ phases as u64)?.values;
        if chosen.iter().all(|&k| k == Word::MAX) {
            return Err(AppError::Disconnected);
        }
        let mut notify = Vec::new();
        for v in 0..n {
            if chosen[v] != Word::MAX && best[v] == chosen[v] {
                let e = decode(g, chosen[v]);
                in_tree[e] = true;
                let (a, b) = g.edges()[e];
                notify.push((v, if a == v { b } else { a }, smallvec![chosen[v]]));
            }
        }
        sim.with_phase("mst-mark", |s| exchange(s, notify))?;
        fragment = component_labels(sim, &in_tree, mode, seed.wrapping_add(phases as u64))?;
        let mut distinct = fragment.clone();
        distinct.sort_unstable();
        distinct.dedup();
        fragments.push(distinct.len());
    }
    let edges = (0..g.m()).filter(|&e| in_tree[e]).collect();
    Ok(MstOutcome { edges, phases, fragments })
}
