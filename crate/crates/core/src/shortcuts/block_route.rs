//! Pipelined convergecast and broadcast over a family of tree blocks.
//!
//! Each task is a subtree of T (a block, or part of one) with a root and a
//! set of participating nodes. Packets carry `(part, word, id)`; a node can
//! hold at most one task per part, so the part id names the task locally.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::agg::{AggOp, Item};
use crate::graph::RootedTree;
use crate::sim::{Ctx, Multiplicity, NodeId, NodeProgram, Payload, SimError, Simulator, Status, Word};

/// Upper bound constant on BlockRoute rounds: K₁·(D_T + c).
pub const K1: u64 = 4;
/// Upper bound constant on BlockRoute messages: K₂·|S|·D_T.
pub const K2: u64 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteTask {
    pub part: usize,
    pub root: NodeId,
    /// Participants (convergecast) or targets (broadcast); all in the root's
    /// subtree.
    pub nodes: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RouteMode {
    /// One packet per edge per round, smallest (root depth, root id) first;
    /// more than `c` packets queued on one edge is a contract violation.
    Det { c: usize },
    /// Every ready packet is forwarded each meta-round of width `beta`;
    /// part `i` starts after `delays[i]` meta-rounds.
    Rand { beta: usize, delays: Vec<usize> },
}

impl RouteMode {
    fn multiplicity(&self) -> Multiplicity {
        match self {
            RouteMode::Det { .. } => Multiplicity::Unit,
            RouteMode::Rand { beta, .. } => Multiplicity::Meta(*beta),
        }
    }

    fn delay(&self, part: usize) -> usize {
        match self {
            RouteMode::Det { .. } => 0,
            RouteMode::Rand { delays, .. } => delays.get(part).copied().unwrap_or(0),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouteError {
    #[error("node {node} had {load} packets queued on one edge, congestion contract is {c}")]
    CongestionContractViolated { node: NodeId, load: usize, c: usize },
    #[error("task for part {part}: node {node} is not below root {root}")]
    NotInSubtree { part: usize, node: NodeId, root: NodeId },
    #[error("two tasks of part {part} meet at node {node}")]
    OverlappingTasks { part: usize, node: NodeId },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-node view of one task.
#[derive(Clone, Debug)]
struct Local {
    prio: (usize, NodeId),
    is_root: bool,
    is_member: bool,
    /// Children on the task's routing tree.
    children: Vec<NodeId>,
}

type Layout = Vec<BTreeMap<usize, Local>>;

/// Builds the routing tree of every task: the union of tree paths from its
/// nodes up to its root. κ(v) = [v participates] + #routing children.
fn layout(tree: &RootedTree, tasks: &[RouteTask]) -> Result<Layout, RouteError> {
    let mut out: Layout = vec![BTreeMap::new(); tree.n()];
    for task in tasks {
        let prio = (tree.depth(task.root), task.root);
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        let touch = |v: NodeId, out: &mut Layout| -> Result<(), RouteError> {
            match out[v].get(&task.part) {
                Some(l) if l.prio != prio => Err(RouteError::OverlappingTasks {
                    part: task.part,
                    node: v,
                }),
                Some(_) => Ok(()),
                None => {
                    out[v].insert(
                        task.part,
                        Local {
                            prio,
                            is_root: v == task.root,
                            is_member: false,
                            children: Vec::new(),
                        },
                    );
                    Ok(())
                }
            }
        };
        touch(task.root, &mut out)?;
        seen.insert(task.root);
        for &s in &task.nodes {
            touch(s, &mut out)?;
            out[s].get_mut(&task.part).unwrap().is_member = true;
            let mut v = s;
            while !seen.contains(&v) {
                seen.insert(v);
                if tree.depth(v) <= tree.depth(task.root) {
                    return Err(RouteError::NotInSubtree {
                        part: task.part,
                        node: s,
                        root: task.root,
                    });
                }
                let p = tree.parent(v).unwrap();
                touch(p, &mut out)?;
                out[p].get_mut(&task.part).unwrap().children.push(v);
                v = p;
            }
        }
    }
    for node in &mut out {
        for l in node.values_mut() {
            l.children.sort_unstable();
        }
    }
    Ok(out)
}

struct Up {
    op: AggOp,
    det_cap: Option<usize>,
    parent: Option<NodeId>,
    tasks: BTreeMap<usize, (Local, usize, Item)>,
    queue: BTreeSet<((usize, NodeId), usize)>,
    /// Parts waiting for their start delay, by release round.
    held: BTreeMap<usize, Vec<usize>>,
    results: BTreeMap<usize, Item>,
    violation: Option<(usize, usize)>,
}

impl Up {
    fn ready(&mut self, part: usize, round: usize, delay: usize) {
        let (l, _, _) = &self.tasks[&part];
        if l.is_root {
            let acc = self.tasks[&part].2;
            self.results.insert(part, acc);
        } else if round < delay {
            self.held.entry(delay).or_default().push(part);
        } else {
            self.queue.insert((l.prio, part));
        }
    }
}

struct UpProgram<'a> {
    state: Up,
    mode: &'a RouteMode,
}

impl NodeProgram for UpProgram<'_> {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        let s = &mut self.state;
        if s.violation.is_some() {
            return Status::Idle;
        }
        let r = ctx.round;
        if r == 0 {
            let parts: Vec<usize> = s.tasks.keys().copied().collect();
            for part in parts {
                if s.tasks[&part].1 == 0 {
                    s.ready(part, 0, self.mode.delay(part));
                }
            }
        }
        for e in ctx.inbox {
            let part = e.payload[0] as usize;
            let item = Item {
                word: e.payload[1],
                id: e.payload[2],
            };
            let op = s.op;
            let t = s.tasks.get_mut(&part).expect("packet for unknown task");
            t.2 = op.combine(t.2, item);
            t.1 -= 1;
            if t.1 == 0 {
                s.ready(part, r, self.mode.delay(part));
            }
        }
        let due: Vec<usize> = s.held.range(..=r).map(|(&k, _)| k).collect();
        for k in due {
            for part in s.held.remove(&k).unwrap() {
                let prio = s.tasks[&part].0.prio;
                s.queue.insert((prio, part));
            }
        }
        if let Some(c) = s.det_cap {
            if s.queue.len() > c {
                s.violation = Some((s.queue.len(), c));
                return Status::Idle;
            }
        }
        let sends = if s.det_cap.is_some() { 1 } else { usize::MAX };
        for _ in 0..sends {
            let Some(first) = s.queue.pop_first() else { break };
            let part = first.1;
            let acc = s.tasks[&part].2;
            let p = s.parent.unwrap();
            ctx.send_words(p, &[part as Word, acc.word, acc.id]);
        }
        if !s.queue.is_empty() {
            Status::Running
        } else if let Some((&k, _)) = s.held.first_key_value() {
            Status::WakeAt(k)
        } else {
            Status::Idle
        }
    }
}

fn round_limit(tree: &RootedTree, tasks: &[RouteTask], mode: &RouteMode) -> usize {
    let max_delay = match mode {
        RouteMode::Det { .. } => 0,
        RouteMode::Rand { delays, .. } => delays.iter().copied().max().unwrap_or(0),
    };
    4 * (tree.height() + 1) + 2 * tasks.len() + max_delay + 8
}

/// Convergecast: each task's root learns the fold of its participants'
/// values. Returns one aggregate per task.
pub fn convergecast(
    sim: &mut Simulator<'_>,
    tree: &RootedTree,
    tasks: &[RouteTask],
    values: &[Vec<Item>],
    op: AggOp,
    mode: &RouteMode,
) -> Result<Vec<Item>, RouteError> {
    let lay = layout(tree, tasks)?;
    let mut inputs: Vec<BTreeMap<usize, Item>> = vec![BTreeMap::new(); tree.n()];
    for (task, vals) in tasks.iter().zip(values) {
        for (&v, &x) in task.nodes.iter().zip(vals) {
            let slot = inputs[v].entry(task.part).or_insert(op.identity());
            *slot = op.combine(*slot, x);
        }
    }
    let det_cap = match mode {
        RouteMode::Det { c } => Some(*c),
        RouteMode::Rand { .. } => None,
    };
    let mut progs: Vec<UpProgram> = lay
        .into_iter()
        .enumerate()
        .map(|(v, locals)| {
            let tasks = locals
                .into_iter()
                .map(|(part, l)| {
                    let acc = inputs[v].get(&part).copied().unwrap_or(op.identity());
                    let pending = l.children.len();
                    (part, (l, pending, acc))
                })
                .collect();
            UpProgram {
                state: Up {
                    op,
                    det_cap,
                    parent: tree.parent(v),
                    tasks,
                    queue: BTreeSet::new(),
                    held: BTreeMap::new(),
                    results: BTreeMap::new(),
                    violation: None,
                },
                mode,
            }
        })
        .collect();
    sim.run(&mut progs, round_limit(tree, tasks, mode), &mode.multiplicity())?;
    for (v, p) in progs.iter().enumerate() {
        if let Some((load, c)) = p.state.violation {
            return Err(RouteError::CongestionContractViolated { node: v, load, c });
        }
    }
    Ok(tasks
        .iter()
        .map(|t| progs[t.root].state.results[&t.part])
        .collect())
}

struct DownProgram<'a> {
    mode: &'a RouteMode,
    det_cap: Option<usize>,
    tasks: BTreeMap<usize, Local>,
    /// Per child edge: queued (prio, part).
    queues: BTreeMap<NodeId, BTreeSet<((usize, NodeId), usize)>>,
    held: BTreeMap<usize, Vec<usize>>,
    values: BTreeMap<usize, Item>,
    received: BTreeMap<usize, Item>,
    violation: Option<(usize, usize)>,
}

impl DownProgram<'_> {
    fn enqueue(&mut self, part: usize) {
        let l = &self.tasks[&part];
        for &c in &l.children {
            self.queues.entry(c).or_default().insert((l.prio, part));
        }
    }
}

impl NodeProgram for DownProgram<'_> {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        if self.violation.is_some() {
            return Status::Idle;
        }
        let r = ctx.round;
        if r == 0 {
            let roots: Vec<usize> = self
                .tasks
                .iter()
                .filter(|(_, l)| l.is_root)
                .map(|(&p, _)| p)
                .collect();
            for part in roots {
                let d = self.mode.delay(part);
                if d > 0 {
                    self.held.entry(d).or_default().push(part);
                } else {
                    self.enqueue(part);
                }
            }
        }
        for e in ctx.inbox {
            let part = e.payload[0] as usize;
            let item = Item {
                word: e.payload[1],
                id: e.payload[2],
            };
            self.values.insert(part, item);
            if self.tasks[&part].is_member {
                self.received.insert(part, item);
            }
            self.enqueue(part);
        }
        let due: Vec<usize> = self.held.range(..=r).map(|(&k, _)| k).collect();
        for k in due {
            for part in self.held.remove(&k).unwrap() {
                self.enqueue(part);
            }
        }
        let per_edge = if self.det_cap.is_some() { 1 } else { usize::MAX };
        let mut busy = false;
        for (&child, q) in self.queues.iter_mut() {
            if let Some(c) = self.det_cap {
                if q.len() > c {
                    self.violation = Some((q.len(), c));
                    return Status::Idle;
                }
            }
            for _ in 0..per_edge {
                let Some((_, part)) = q.pop_first() else { break };
                let x = self.values[&part];
                let mut p = Payload::new();
                p.extend_from_slice(&[part as Word, x.word, x.id]);
                ctx.send(child, p);
            }
            busy |= !q.is_empty();
        }
        if busy {
            Status::Running
        } else if let Some((&k, _)) = self.held.first_key_value() {
            Status::WakeAt(k)
        } else {
            Status::Idle
        }
    }
}

/// Broadcast: each task's root value reaches every target. Returns, per
/// task, the value received by each target (aligned with `nodes`; the root
/// itself reports its own value).
pub fn broadcast(
    sim: &mut Simulator<'_>,
    tree: &RootedTree,
    tasks: &[RouteTask],
    root_values: &[Item],
    mode: &RouteMode,
) -> Result<Vec<Vec<Item>>, RouteError> {
    let lay = layout(tree, tasks)?;
    let det_cap = match mode {
        RouteMode::Det { c } => Some(*c),
        RouteMode::Rand { .. } => None,
    };
    let mut progs: Vec<DownProgram> = lay
        .into_iter()
        .map(|locals| DownProgram {
            mode,
            det_cap,
            tasks: locals,
            queues: BTreeMap::new(),
            held: BTreeMap::new(),
            values: BTreeMap::new(),
            received: BTreeMap::new(),
            violation: None,
        })
        .collect();
    for (t, &x) in tasks.iter().zip(root_values) {
        progs[t.root].values.insert(t.part, x);
        progs[t.root].received.insert(t.part, x);
    }
    sim.run(&mut progs, round_limit(tree, tasks, mode), &mode.multiplicity())?;
    for (v, p) in progs.iter().enumerate() {
        if let Some((load, c)) = p.violation {
            return Err(RouteError::CongestionContractViolated { node: v, load, c });
        }
    }
    Ok(tasks
        .iter()
        .map(|t| t.nodes.iter().map(|&v| progs[v].received[&t.part]).collect())
        .collect())
}

/// Tasks for a full convergecast over blocks: one task per block of each
/// listed part that contains a participant.
pub fn block_tasks(
    blocks: &super::BlockStructure,
    participants: &[(usize, NodeId)],
) -> Vec<RouteTask> {
    let mut by_block: BTreeMap<(usize, usize), Vec<NodeId>> = BTreeMap::new();
    for &(part, v) in participants {
        let b = blocks
            .block_of(part, v)
            .expect("participant lies in one of its part's blocks");
        by_block.entry((part, b)).or_default().push(v);
    }
    by_block
        .into_iter()
        .map(|((part, b), mut nodes)| {
            nodes.sort_unstable();
            nodes.dedup();
            RouteTask {
                part,
                root: blocks.blocks(part)[b].root,
                nodes,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_tree_oracle, gen_grid_with_apex, NetworkGraph};
    use crate::shortcuts::{BlockStructure, Shortcut};

    #[test]
    fn single_leaf_upcast() {
        let g = NetworkGraph::path(6);
        let t = bfs_tree_oracle(&g, 0).unwrap();
        let mut sim = Simulator::new(&g);
        let task = RouteTask {
            part: 0,
            root: 0,
            nodes: vec![5],
        };
        let out = convergecast(
            &mut sim,
            &t,
            &[task],
            &[vec![AggOp::Sum.lift(5, 42)]],
            AggOp::Sum,
            &RouteMode::Det { c: 1 },
        )
        .unwrap();
        assert_eq!(out[0].word, 42);
        assert_eq!(sim.report().messages, 5);
        assert!(sim.report().rounds <= 5);
    }

    #[test]
    fn grid_column_blocks_fold_per_block() {
        let gw = gen_grid_with_apex(8, 8);
        let t = bfs_tree_oracle(&gw.graph, 0).unwrap();
        let np = gw.partition.num_parts();
        // Column edges: tree edges whose child lies below row 0.
        let column: Vec<NodeId> = (1..gw.graph.n())
            .filter(|&v| t.parent(v).is_some_and(|p| p != 0 && (p - 1) % 8 == (v - 1) % 8))
            .collect();
        let mut sets = vec![column; np];
        sets[gw.apex_part()].clear();
        let s = Shortcut::from_sets(sets);
        let bs = BlockStructure::compute(&t, &gw.partition, &s);
        let parts: Vec<(usize, NodeId)> = gw
            .row_parts()
            .flat_map(|i| gw.partition.members(i).iter().map(move |&v| (i, v)))
            .collect();
        let tasks = block_tasks(&bs, &parts);
        let op = AggOp::Sum;
        let values: Vec<Vec<Item>> = tasks
            .iter()
            .map(|t| t.nodes.iter().map(|&v| op.lift(v, (v * v) as Word)).collect())
            .collect();
        let (c, _) = s.congestion();
        let mut sim = Simulator::new(&gw.graph);
        let out = convergecast(&mut sim, &t, &tasks, &values, op, &RouteMode::Det { c }).unwrap();
        for (k, task) in tasks.iter().enumerate() {
            let expect: Word = task.nodes.iter().map(|&v| (v * v) as Word).sum();
            assert_eq!(out[k].word, expect);
        }
        let r = sim.report();
        assert!(r.rounds <= K1 * (t.height() + c) as u64);
        assert!(r.messages <= K2 * (parts.len() * t.height()) as u64);

        // Broadcast back, mirroring the convergecast edge count.
        let mut sim2 = Simulator::new(&gw.graph);
        let back = broadcast(&mut sim2, &t, &tasks, &out, &RouteMode::Det { c }).unwrap();
        for (k, vals) in back.iter().enumerate() {
            assert!(vals.iter().all(|x| x.word == out[k].word));
        }
        assert_eq!(sim2.report().messages, sim.report().messages);
    }

    #[test]
    fn overlapping_blocks_on_path() {
        let n = 40;
        let g = NetworkGraph::path(n);
        let t = bfs_tree_oracle(&g, 0).unwrap();
        let tasks: Vec<RouteTask> = (0..5)
            .map(|i| RouteTask {
                part: i,
                root: i,
                nodes: vec![n - 1 - i, n - 10 - i],
            })
            .collect();
        let values: Vec<Vec<Item>> = tasks
            .iter()
            .map(|t| t.nodes.iter().map(|&v| AggOp::Max.lift(v, v as Word)).collect())
            .collect();
        let mut sim = Simulator::new(&g);
        let out =
            convergecast(&mut sim, &t, &tasks, &values, AggOp::Max, &RouteMode::Det { c: 5 })
                .unwrap();
        for i in 0..5 {
            assert_eq!(out[i].word, (n - 1 - i) as Word);
        }
        assert!(sim.report().rounds <= K1 * (t.height() + 5) as u64);

        // All five packets start at the same leaf and must share its edge.
        let stacked: Vec<RouteTask> = (0..5)
            .map(|i| RouteTask {
                part: i,
                root: i,
                nodes: vec![n - 1],
            })
            .collect();
        let one: Vec<Vec<Item>> = (0..5).map(|_| vec![AggOp::Max.lift(n - 1, 1)]).collect();
        let mut sim = Simulator::new(&g);
        let err =
            convergecast(&mut sim, &t, &stacked, &one, AggOp::Max, &RouteMode::Det { c: 1 });
        assert!(matches!(err, Err(RouteError::CongestionContractViolated { .. })));
    }

    #[test]
    fn randomized_meta_rounds() {
        let n = 30;
        let g = NetworkGraph::path(n);
        let t = bfs_tree_oracle(&g, 0).unwrap();
        let tasks: Vec<RouteTask> = (0..4)
            .map(|i| RouteTask {
                part: i,
                root: 0,
                nodes: vec![n - 1],
            })
            .collect();
        let values: Vec<Vec<Item>> = (0..4).map(|i| vec![AggOp::Min.lift(n - 1, i)]).collect();
        let mode = RouteMode::Rand {
            beta: 4,
            delays: vec![0, 1, 0, 2],
        };
        let mut sim = Simulator::new(&g);
        let out = convergecast(&mut sim, &t, &tasks, &values, AggOp::Min, &mode).unwrap();
        assert_eq!(out.iter().map(|x| x.word).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        let tight = RouteMode::Rand {
            beta: 1,
            delays: vec![0, 0, 0, 0],
        };
        let mut sim = Simulator::new(&g);
        let err = convergecast(&mut sim, &t, &tasks, &values, AggOp::Min, &tight);
        assert!(matches!(err, Err(RouteError::Sim(SimError::CapacityExceeded { .. }))));
    }
}
