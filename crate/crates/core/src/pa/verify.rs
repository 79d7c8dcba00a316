//! Block parameter verification.

use super::solve::{block_indicator, gather_with, spread_values, PaSetup};
use super::PaError;
use crate::agg::{AggOp, Item};
use crate::sim::{exchange, NodeId, Payload, Simulator, Word};

/// Verdict of [`verify_block_parameter`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    /// Per node: does its part's block count stay within the budget?
    pub node_pass: Vec<bool>,
    /// Per part, as decided at the leader.
    pub part_pass: Vec<bool>,
    /// Block count learnt by each leader (only meaningful for parts whose
    /// spread reached every node).
    pub part_blocks: Vec<u64>,
}

/// Tells every node whether its part meets over at most `setup.b` blocks
/// (counting blocks that hold a representative).
pub fn verify_block_parameter(sim: &mut Simulator<'_>, setup: PaSetup<'_>) -> Result<Verdict, PaError> {
    let n = setup.partition.n();
    let parts = setup.partition.num_parts();
    let ids: Vec<Item> = setup.leaders.iter().map(|&l| AggOp::Min.lift(l, l as Word)).collect();
    let sp = spread_values(sim, setup, &ids)?;

    // Unreached nodes complain to their part neighbours.
    let g = sim.graph();
    let mut sends = Vec::new();
    for v in (0..n).filter(|&v| sp.got[v].is_none()) {
        for &w in g.neighbors(v) {
            if setup.partition.part_of(w) == setup.partition.part_of(v) {
                sends.push((v, w, Payload::from_slice(&[1])));
            }
        }
    }
    let inbox = sim.with_phase("complaint", |s| exchange(s, sends))?;
    let heard: Vec<Item> = (0..n)
        .map(|v| {
            let flag = sp.got[v].is_some() && !inbox[v].is_empty();
            AggOp::Or.lift(v, flag as Word)
        })
        .collect();
    let complained = gather_with(sim, setup, &sp, &heard, AggOp::Or)?;

    let marks = block_indicator(sim, setup, &sp)?;
    let marks: Vec<Item> = marks.iter().enumerate().map(|(v, &x)| AggOp::Sum.lift(v, x)).collect();
    let counts = gather_with(sim, setup, &sp, &marks, AggOp::Sum)?;

    let b = setup.b.max(1) as u64;
    let part_pass: Vec<bool> = (0..parts)
        .map(|i| complained[i].word == 0 && counts[i].word <= b)
        .collect();
    let verdict: Vec<Item> = part_pass
        .iter()
        .enumerate()
        .map(|(i, &ok)| AggOp::Min.lift(setup.leaders[i], ok as Word))
        .collect();
    let told = spread_values(sim, setup, &verdict)?;
    let node_pass: Vec<bool> = (0..n)
        .map(|v: NodeId| sp.got[v].is_some() && told.got[v].is_some_and(|x| x.word == 1))
        .collect();
    Ok(Verdict {
        node_pass,
        part_pass,
        part_blocks: counts.iter().map(|c| c.word).collect(),
    })
}
