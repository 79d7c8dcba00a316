//! Naive aggregation over one whole-tree block per part: every node's value
//! travels to the tree root on its own, since values of one part cannot be
//! combined before they meet at the block root.

use std::collections::VecDeque;

use super::PaError;
use crate::agg::AggOp;
use crate::graph::{Partition, RootedTree};
use crate::shortcuts::{broadcast, RouteMode, RouteTask};
use crate::sim::{Ctx, Multiplicity, NodeId, NodeProgram, Simulator, Status, Word};

struct Upcast {
    parent: Option<NodeId>,
    queue: VecDeque<[Word; 3]>,
    arrived: Vec<[Word; 3]>,
}

impl NodeProgram for Upcast {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        for e in ctx.inbox {
            let pkt = [e.payload[0], e.payload[1], e.payload[2]];
            match self.parent {
                Some(_) => self.queue.push_back(pkt),
                None => self.arrived.push(pkt),
            }
        }
        match (self.parent, self.queue.pop_front()) {
            (Some(p), Some(pkt)) => {
                ctx.send_words(p, &pkt);
                Status::Running
            }
            _ => Status::Idle,
        }
    }
}

/// Returns the aggregate per node.
pub fn naive_block_aggregation_baseline(
    sim: &mut Simulator<'_>,
    tree: &RootedTree,
    partition: &Partition,
    values: &[Word],
    op: AggOp,
) -> Result<Vec<Word>, PaError> {
    let n = tree.n();
    let root = tree.root();
    let mut progs: Vec<Upcast> = (0..n)
        .map(|v| Upcast {
            parent: tree.parent(v),
            queue: VecDeque::new(),
            arrived: Vec::new(),
        })
        .collect();
    for v in 0..n {
        let pkt = [partition.part_of(v) as Word, values[v], v as Word];
        match tree.parent(v) {
            Some(_) => progs[v].queue.push_back(pkt),
            None => progs[v].arrived.push(pkt),
        }
    }
    sim.with_phase("baseline-up", |s| s.run(&mut progs, 2 * n + 2, &Multiplicity::Unit))?;
    let mut per_part = vec![op.identity(); partition.num_parts()];
    for pkt in &progs[root].arrived {
        let i = pkt[0] as usize;
        per_part[i] = op.combine(per_part[i], op.lift(pkt[2] as NodeId, pkt[1]));
    }
    let tasks: Vec<RouteTask> = (0..partition.num_parts())
        .map(|i| RouteTask {
            part: i,
            root,
            nodes: partition.members(i).iter().copied().filter(|&v| v != root).collect(),
        })
        .collect();
    let mode = RouteMode::Det {
        c: partition.num_parts(),
    };
    let got = sim.with_phase("baseline-down", |s| broadcast(s, tree, &tasks, &per_part, &mode))?;
    let mut out = vec![0; n];
    for (i, (t, xs)) in tasks.iter().zip(got).enumerate() {
        for (&v, x) in t.nodes.iter().zip(xs) {
            out[v] = x.word;
        }
        if partition.part_of(root) == i {
            out[root] = per_part[i].word;
        }
    }
    Ok(out)
}
