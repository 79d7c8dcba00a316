//! Part-wise aggregation given a sub-part division and a tree-restricted
//! shortcut.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::flow::{gather_up, push_down, relay_up};
use super::{Mode, PaError};
use crate::agg::{AggOp, Item};
use crate::graph::{Partition, RootedTree};
use crate::shortcuts::{block_route, BlockStructure, RouteMode, RouteTask, Shortcut};
use crate::sim::{exchange, node_rng, NodeId, Payload, Simulator, Word};
use crate::subparts::SubPartDivision;

/// Round bound constant for the deterministic solver.
pub const K_PA: u64 = 8;
/// Message bound constant for the solver.
pub const K_M: u64 = 64;
/// Meta-round width constant: β = ⌈C_β·ln n⌉.
pub const C_BETA: f64 = 3.0;

pub fn beta(n: usize) -> usize {
    ((C_BETA * (n.max(2) as f64).ln()).ceil() as usize).max(1)
}

/// Everything the solver needs besides the node values.
#[derive(Clone, Copy)]
pub struct PaSetup<'a> {
    pub tree: &'a RootedTree,
    pub partition: &'a Partition,
    pub leaders: &'a [NodeId],
    pub division: &'a SubPartDivision,
    pub shortcut: &'a Shortcut,
    /// Number of spreading iterations.
    pub b: usize,
    pub mode: Mode,
    pub seed: u64,
}

/// Derived per-instance knowledge.
struct Prepared<'a> {
    s: PaSetup<'a>,
    blocks: BlockStructure,
    /// Representatives of each (part, block).
    block_reps: BTreeMap<(usize, usize), Vec<NodeId>>,
    /// Parts split into more than one sub-part.
    multi: Vec<bool>,
    sub_parent: Vec<Option<NodeId>>,
    sub_children: Vec<Vec<NodeId>>,
    c: usize,
    route_runs: u64,
}

impl<'a> Prepared<'a> {
    fn new(mut s: PaSetup<'a>) -> Self {
        s.b = s.b.max(1);
        let blocks = BlockStructure::compute(s.tree, s.partition, s.shortcut);
        let n = s.partition.n();
        let mut block_reps: BTreeMap<(usize, usize), Vec<NodeId>> = BTreeMap::new();
        let mut multi = vec![false; s.partition.num_parts()];
        for (i, m) in multi.iter_mut().enumerate() {
            let reps = s.division.reps_of_part(s.partition, i);
            *m = reps.len() > 1;
            for r in reps {
                let b = blocks.block_of(i, r).expect("every part node lies in a block");
                block_reps.entry((i, b)).or_default().push(r);
            }
        }
        let sub_parent: Vec<Option<NodeId>> = (0..n).map(|v| s.division.parent(v)).collect();
        let sub_children: Vec<Vec<NodeId>> = (0..n).map(|v| s.division.children(v).to_vec()).collect();
        let c = s.shortcut.congestion().0.max(1);
        Prepared {
            s,
            blocks,
            block_reps,
            multi,
            sub_parent,
            sub_children,
            c,
            route_runs: 0,
        }
    }

    fn part(&self, v: NodeId) -> usize {
        self.s.partition.part_of(v)
    }

    fn rep(&self, v: NodeId) -> NodeId {
        self.s.division.rep(v)
    }

    /// Routing mode for one block-route sub-run; randomized runs draw a fresh
    /// per-part delay in [0, c) at each part's leader.
    fn route_mode(&mut self) -> RouteMode {
        match self.s.mode {
            Mode::Det => RouteMode::Det { c: self.c },
            Mode::Rand => {
                self.route_runs += 1;
                let stream = self.s.seed ^ self.route_runs.wrapping_mul(0xA24B_AED4_963E_E407);
                let delays = self
                    .s
                    .leaders
                    .iter()
                    .map(|&l| node_rng(stream, l).gen_range(0..self.c))
                    .collect();
                RouteMode::Rand {
                    beta: beta(self.s.partition.n()),
                    delays,
                }
            }
        }
    }
}

/// How a node on a route path first heard of the message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Hop {
    Cross(NodeId),
    Child(NodeId),
}

/// Block-route activation of one block in one iteration.
#[derive(Clone, Debug)]
struct BlockLog {
    part: usize,
    root: NodeId,
    designated: NodeId,
    reached: Vec<NodeId>,
}

#[derive(Clone, Debug, Default)]
struct IterLog {
    /// Active representatives after the block-route step.
    active: Vec<NodeId>,
    blocks: Vec<BlockLog>,
    /// Representatives activated by crossing sub-part boundaries.
    fresh: Vec<NodeId>,
}

/// Outcome of one spreading pass.
#[derive(Clone, Debug)]
pub struct Spread {
    /// Message held by each node (`None` if it never arrived).
    pub got: Vec<Option<Item>>,
    /// Iteration in which each representative became active; only
    /// representatives whose sub-part was broadcast to are listed.
    pub activated: BTreeMap<NodeId, usize>,
    lead_from: Vec<Option<NodeId>>,
    route_from: Vec<Option<Hop>>,
    iters: Vec<IterLog>,
}

fn spread(sim: &mut Simulator<'_>, p: &mut Prepared<'_>, msg: &[Item]) -> Result<Spread, PaError> {
    let n = p.s.partition.n();
    let mut got: Vec<Option<Item>> = vec![None; n];
    let seeds: Vec<(NodeId, Item)> = p.s.leaders.iter().zip(msg).map(|(&l, &m)| (l, m)).collect();
    let lead = sim.with_phase("leader-route", |s| relay_up(s, &p.sub_parent, &seeds))?;
    let mut lead_from = vec![None; n];
    for v in 0..n {
        if let Some((x, from)) = lead[v] {
            got[v] = Some(x);
            lead_from[v] = from;
        }
    }
    let mut active: BTreeSet<NodeId> = p.s.leaders.iter().map(|&l| p.rep(l)).collect();
    let mut done: BTreeSet<NodeId> = BTreeSet::new();
    let mut activated: BTreeMap<NodeId, usize> = active.iter().map(|&r| (r, 0)).collect();
    let mut route_from: Vec<Option<Hop>> = vec![None; n];
    let mut iters = Vec::with_capacity(p.s.b);

    for j in 0..p.s.b {
        let mut log = IterLog::default();
        // Block route among active representatives of split parts.
        let parts: Vec<(usize, NodeId)> = active
            .iter()
            .filter(|&&r| p.multi[p.part(r)])
            .map(|&r| (p.part(r), r))
            .collect();
        if !parts.is_empty() {
            let up = block_route::block_tasks(&p.blocks, &parts);
            let vals: Vec<Vec<Item>> = up
                .iter()
                .map(|t| t.nodes.iter().map(|&r| Item { word: got[r].unwrap().word, id: r as Word }).collect())
                .collect();
            let mode = p.route_mode();
            let agg = sim.with_phase("block-route", |s| {
                block_route::convergecast(s, p.s.tree, &up, &vals, AggOp::Min, &mode)
            })?;
            let mut down = Vec::new();
            let mut down_vals = Vec::new();
            let mut pending = Vec::new();
            for (t, a) in up.iter().zip(&agg) {
                let b = p.blocks.block_of(t.part, t.root).expect("root lies in its block");
                let targets: Vec<NodeId> = p.block_reps[&(t.part, b)]
                    .iter()
                    .copied()
                    .filter(|r| !active.contains(r) && !done.contains(r))
                    .collect();
                if targets.is_empty() {
                    continue;
                }
                pending.push(BlockLog {
                    part: t.part,
                    root: t.root,
                    designated: a.id as NodeId,
                    reached: targets.clone(),
                });
                down.push(RouteTask { part: t.part, root: t.root, nodes: targets });
                down_vals.push(Item { word: a.word, id: a.id });
            }
            if !down.is_empty() {
                let mode = p.route_mode();
                let recv = sim.with_phase("block-route", |s| {
                    block_route::broadcast(s, p.s.tree, &down, &down_vals, &mode)
                })?;
                for (t, xs) in down.iter().zip(recv) {
                    for (&r, x) in t.nodes.iter().zip(xs) {
                        got[r] = Some(x);
                        active.insert(r);
                        activated.insert(r, j);
                    }
                }
            }
            log.blocks = pending;
        }
        log.active = active.iter().copied().collect();

        // Broadcast inside the active sub-parts.
        let seeds: Vec<(NodeId, Item)> = active.iter().map(|&r| (r, got[r].unwrap())).collect();
        let inside = sim.with_phase("subpart-bcast", |s| push_down(s, &p.sub_children, &seeds))?;
        let in_active: Vec<bool> = (0..n).map(|v| active.contains(&p.rep(v))).collect();
        for v in 0..n {
            if in_active[v] {
                got[v] = inside[v];
            }
        }

        // One hop across sub-part boundaries, then up to fresh representatives.
        let g = sim.graph();
        let mut sends = Vec::new();
        for v in (0..n).filter(|&v| in_active[v]) {
            let x = got[v].unwrap();
            for &w in g.neighbors(v) {
                if p.part(w) == p.part(v) && p.rep(w) != p.rep(v) {
                    sends.push((v, w, Payload::from_slice(&[x.word, x.id])));
                }
            }
        }
        let inbox = sim.with_phase("cross-subpart", |s| exchange(s, sends))?;
        let mut starts = Vec::new();
        for (w, msgs) in inbox.into_iter().enumerate() {
            let r = p.rep(w);
            if msgs.is_empty() || active.contains(&r) || done.contains(&r) {
                continue;
            }
            let e = &msgs[0];
            route_from[w] = Some(Hop::Cross(e.src));
            starts.push((w, Item { word: e.payload[0], id: e.payload[1] }));
        }
        let routed = sim.with_phase("cross-subpart", |s| relay_up(s, &p.sub_parent, &starts))?;
        let mut fresh = BTreeSet::new();
        for v in 0..n {
            if let Some((x, from)) = routed[v] {
                if let Some(c) = from {
                    route_from[v] = Some(Hop::Child(c));
                }
                got[v] = Some(x);
                if p.s.division.is_rep(v) {
                    fresh.insert(v);
                }
            }
        }
        done.extend(active.iter().copied());
        if j + 1 < p.s.b {
            for &r in &fresh {
                activated.insert(r, j + 1);
            }
        }
        log.fresh = fresh.iter().copied().collect();
        active = fresh;
        iters.push(log);
    }
    // A node holds the message only once its sub-part was broadcast to.
    for (v, x) in got.iter_mut().enumerate() {
        if !activated.contains_key(&p.rep(v)) {
            *x = None;
        }
    }
    Ok(Spread {
        got,
        activated,
        lead_from,
        route_from,
        iters,
    })
}

/// Mirror of [`spread`]: folds every node's value back to its part leader.
fn gather(
    sim: &mut Simulator<'_>,
    p: &mut Prepared<'_>,
    sp: &Spread,
    values: &[Item],
    op: AggOp,
) -> Result<Vec<Item>, PaError> {
    let n = values.len();
    let mut total: Vec<Item> = vec![op.identity(); n];
    let mut extra: Vec<Item> = vec![op.identity(); n];
    let mut route_kids = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(Hop::Child(c)) = sp.route_from[v] {
            route_kids[v].push(c);
        }
    }
    let expect: Vec<usize> = p.sub_children.iter().map(|c| c.len()).collect();

    for log in sp.iters.iter().rev() {
        // Fresh representatives hand their totals back across the boundary.
        let fresh: BTreeSet<NodeId> = log
            .fresh
            .iter()
            .copied()
            .filter(|r| sp.activated.contains_key(r))
            .collect();
        let seeds: Vec<(NodeId, Item)> = fresh.iter().map(|&r| (r, total[r])).collect();
        if !seeds.is_empty() {
            let back = sim.with_phase("cross-subpart", |s| push_down(s, &route_kids, &seeds))?;
            let mut sends = Vec::new();
            for v in 0..n {
                if let (Some(x), Some(Hop::Cross(u))) = (back[v], sp.route_from[v]) {
                    if fresh.contains(&p.rep(v)) {
                        sends.push((v, u, Payload::from_slice(&[x.word, x.id])));
                    }
                }
            }
            let inbox = sim.with_phase("cross-subpart", |s| exchange(s, sends))?;
            for (u, msgs) in inbox.into_iter().enumerate() {
                for e in msgs {
                    extra[u] = op.combine(extra[u], Item { word: e.payload[0], id: e.payload[1] });
                }
            }
        }

        // Convergecast inside the sub-parts active in this iteration.
        let act: BTreeSet<NodeId> = log.active.iter().copied().collect();
        let mask: Vec<bool> = (0..n).map(|v| act.contains(&p.rep(v))).collect();
        let inputs: Vec<Item> = (0..n)
            .map(|v| if mask[v] { op.combine(values[v], extra[v]) } else { op.identity() })
            .collect();
        let folded = sim.with_phase("subpart-bcast", |s| {
            gather_up(s, &p.sub_parent, &expect, &mask, &inputs, op)
        })?;
        for &r in &log.active {
            total[r] = folded[r];
        }

        // Block-route reached representatives report to their block's root,
        // which hands the fold to the designated active representative.
        if !log.blocks.is_empty() {
            let up: Vec<RouteTask> = log
                .blocks
                .iter()
                .map(|bl| RouteTask { part: bl.part, root: bl.root, nodes: bl.reached.clone() })
                .collect();
            let vals: Vec<Vec<Item>> = up.iter().map(|t| t.nodes.iter().map(|&r| total[r]).collect()).collect();
            let mode = p.route_mode();
            let agg = sim.with_phase("block-route", |s| {
                block_route::convergecast(s, p.s.tree, &up, &vals, op, &mode)
            })?;
            let down: Vec<RouteTask> = log
                .blocks
                .iter()
                .map(|bl| RouteTask { part: bl.part, root: bl.root, nodes: vec![bl.designated] })
                .collect();
            let mode = p.route_mode();
            let recv = sim.with_phase("block-route", |s| {
                block_route::broadcast(s, p.s.tree, &down, &agg, &mode)
            })?;
            for (bl, xs) in log.blocks.iter().zip(recv) {
                total[bl.designated] = op.combine(total[bl.designated], xs[0]);
            }
        }
    }

    // Back down the leader route.
    let mut lead_kids = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(c) = sp.lead_from[v] {
            lead_kids[v].push(c);
        }
    }
    let seeds: Vec<(NodeId, Item)> = p.s.leaders.iter().map(|&l| (p.rep(l), total[p.rep(l)])).collect();
    let back = sim.with_phase("leader-route", |s| push_down(s, &lead_kids, &seeds))?;
    Ok(p.s.leaders.iter().map(|&l| back[l].expect("leader route is a path")).collect())
}

fn check_spread(p: &Prepared<'_>, sp: &Spread) -> Result<(), PaError> {
    match sp.got.iter().position(|g| g.is_none()) {
        Some(v) => Err(PaError::ShortcutTooWeak { part: p.part(v) }),
        None => Ok(()),
    }
}

/// Broadcasts each leader's id to its part. Nodes that it never reached
/// hold `None`.
pub fn spread_leader_ids(sim: &mut Simulator<'_>, setup: PaSetup<'_>) -> Result<Vec<Option<Item>>, PaError> {
    let mut p = Prepared::new(setup);
    let msg: Vec<Item> = setup.leaders.iter().map(|&l| AggOp::Min.lift(l, l as Word)).collect();
    Ok(spread(sim, &mut p, &msg)?.got)
}

/// Full pass with the structure exposed, for inspection.
pub fn spread_trace(sim: &mut Simulator<'_>, setup: PaSetup<'_>) -> Result<Spread, PaError> {
    let mut p = Prepared::new(setup);
    let msg: Vec<Item> = setup.leaders.iter().map(|&l| AggOp::Min.lift(l, l as Word)).collect();
    spread(sim, &mut p, &msg)
}

/// Solves PA: spreads the leader id, folds values back to the leaders along
/// the same structure, then spreads the aggregate. Returns the aggregate
/// per node.
pub fn pa_solve(
    sim: &mut Simulator<'_>,
    setup: PaSetup<'_>,
    values: &[Word],
    op: AggOp,
) -> Result<Vec<Word>, PaError> {
    let mut p = Prepared::new(setup);
    let lifted: Vec<Item> = values.iter().enumerate().map(|(v, &x)| op.lift(v, x)).collect();
    let msg: Vec<Item> = setup.leaders.iter().map(|&l| AggOp::Min.lift(l, l as Word)).collect();
    let sp = spread(sim, &mut p, &msg)?;
    check_spread(&p, &sp)?;
    let at_leader = gather(sim, &mut p, &sp, &lifted, op)?;
    let out = spread(sim, &mut p, &at_leader)?;
    check_spread(&p, &out)?;
    Ok(out.got.into_iter().map(|g| g.unwrap().word).collect())
}

/// Marks, per block holding activated representatives, the smallest of
/// them: block convergecast of representative ids, then the minimum is
/// broadcast back to the block's representatives. Returns 1 at marked
/// representatives and 0 elsewhere.
pub(crate) fn block_indicator(
    sim: &mut Simulator<'_>,
    setup: PaSetup<'_>,
    sp: &Spread,
) -> Result<Vec<Word>, PaError> {
    let mut p = Prepared::new(setup);
    let n = p.s.partition.n();
    let mut out = vec![0; n];
    let mut parts = Vec::new();
    for &r in sp.activated.keys() {
        if p.multi[p.part(r)] {
            parts.push((p.part(r), r));
        } else {
            out[r] = 1;
        }
    }
    if parts.is_empty() {
        return Ok(out);
    }
    let tasks = block_route::block_tasks(&p.blocks, &parts);
    let vals: Vec<Vec<Item>> = tasks
        .iter()
        .map(|t| t.nodes.iter().map(|&r| AggOp::Min.lift(r, r as Word)).collect())
        .collect();
    let mode = p.route_mode();
    let mins = sim.with_phase("block-count", |s| {
        block_route::convergecast(s, p.s.tree, &tasks, &vals, AggOp::Min, &mode)
    })?;
    let mode = p.route_mode();
    let recv = sim.with_phase("block-count", |s| block_route::broadcast(s, p.s.tree, &tasks, &mins, &mode))?;
    for (t, xs) in tasks.iter().zip(recv) {
        for (&r, x) in t.nodes.iter().zip(xs) {
            if x.word == r as Word {
                out[r] = 1;
            }
        }
    }
    Ok(out)
}

/// Folds each part's values to its leader over an already computed spread.
pub(crate) fn gather_with(
    sim: &mut Simulator<'_>,
    setup: PaSetup<'_>,
    sp: &Spread,
    values: &[Item],
    op: AggOp,
) -> Result<Vec<Item>, PaError> {
    let mut p = Prepared::new(setup);
    gather(sim, &mut p, sp, values, op)
}

/// Spreads one value per part from its leader.
pub(crate) fn spread_values(
    sim: &mut Simulator<'_>,
    setup: PaSetup<'_>,
    msg: &[Item],
) -> Result<Spread, PaError> {
    let mut p = Prepared::new(setup);
    spread(sim, &mut p, msg)
}
