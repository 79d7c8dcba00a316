//! Aggregation over a forest of spanning trees (clusters), and merging of
//! clusters along chosen edges.

use std::collections::BTreeMap;

use crate::agg::{AggOp, Item};
use crate::sim::{exchange, Ctx, Multiplicity, NodeId, NodeProgram, Payload, SimError, Simulator, Status};

/// Rooted spanning trees over disjoint node clusters; the cluster id is the
/// root's node id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forest {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    root_of: Vec<NodeId>,
}

impl Forest {
    pub fn singletons(n: usize) -> Self {
        Self::from_parents(vec![None; n])
    }

    /// Panics on cycles.
    pub fn from_parents(parent: Vec<Option<NodeId>>) -> Self {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(v);
            }
        }
        let mut root_of = vec![usize::MAX; n];
        let mut stack: Vec<NodeId> = (0..n).filter(|&v| parent[v].is_none()).collect();
        for &r in &stack {
            root_of[r] = r;
        }
        while let Some(u) = stack.pop() {
            for &c in &children[u] {
                root_of[c] = root_of[u];
                stack.push(c);
            }
        }
        assert!(root_of.iter().all(|&r| r != usize::MAX), "parent pointers contain a cycle");
        Forest {
            parent,
            children,
            root_of,
        }
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    /// Cluster id (root) of `v`.
    pub fn root_of(&self, v: NodeId) -> NodeId {
        self.root_of[v]
    }

    pub fn roots(&self) -> Vec<NodeId> {
        (0..self.n()).filter(|&v| self.parent[v].is_none()).collect()
    }

    /// Members of every cluster, keyed by root.
    pub fn clusters(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut out: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for v in 0..self.n() {
            out.entry(self.root_of[v]).or_default().push(v);
        }
        out
    }

    /// Depth of `v` in its tree.
    pub fn depth(&self, mut v: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[v] {
            v = p;
            d += 1;
        }
        d
    }

    /// Longest path (in edges) inside each tree, keyed by root.
    pub fn diameters(&self) -> BTreeMap<NodeId, usize> {
        let mut down = vec![0usize; self.n()];
        let mut best: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut order: Vec<NodeId> = (0..self.n()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.depth(v)));
        for v in order {
            let mut top = [0usize; 2];
            for &c in &self.children[v] {
                let h = down[c] + 1;
                if h > top[0] {
                    top = [h, top[0]];
                } else if h > top[1] {
                    top[1] = h;
                }
            }
            down[v] = top[0];
            let e = best.entry(self.root_of[v]).or_default();
            *e = (*e).max(top[0] + top[1]);
        }
        best
    }
}

struct Reduce {
    op: AggOp,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    acc: Item,
    pending: usize,
    sent_up: bool,
    result: Option<Item>,
}

impl Reduce {
    fn push_down(&self, ctx: &mut Ctx<'_>, x: Item) {
        for &c in &self.children {
            ctx.send_words(c, &[x.word, x.id]);
        }
    }
}

impl NodeProgram for Reduce {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        for e in ctx.inbox {
            let x = Item {
                word: e.payload[0],
                id: e.payload[1],
            };
            if Some(e.src) == self.parent {
                self.result = Some(x);
                self.push_down(ctx, x);
            } else {
                self.acc = self.op.combine(self.acc, x);
                self.pending -= 1;
            }
        }
        if self.pending == 0 && !self.sent_up {
            self.sent_up = true;
            match self.parent {
                Some(p) => ctx.send_words(p, &[self.acc.word, self.acc.id]),
                None => {
                    self.result = Some(self.acc);
                    self.push_down(ctx, self.acc);
                }
            }
        }
        Status::Idle
    }
}

/// Every node learns the fold of its cluster's values (convergecast then
/// broadcast along the cluster tree).
pub fn all_reduce(
    sim: &mut Simulator<'_>,
    forest: &Forest,
    values: &[Item],
    op: AggOp,
) -> Result<Vec<Item>, SimError> {
    all_reduce_on(sim, forest, values, op, |_| true)
}

/// [`all_reduce`] restricted to clusters whose root satisfies `active`;
/// other nodes stay silent and get their own value back.
pub fn all_reduce_on(
    sim: &mut Simulator<'_>,
    forest: &Forest,
    values: &[Item],
    op: AggOp,
    active: impl Fn(NodeId) -> bool,
) -> Result<Vec<Item>, SimError> {
    let n = forest.n();
    let mut progs: Vec<Reduce> = (0..n)
        .map(|v| {
            let on = active(forest.root_of(v));
            Reduce {
                op,
                parent: if on { forest.parent(v) } else { None },
                children: if on { forest.children(v).to_vec() } else { Vec::new() },
                acc: values[v],
                pending: if on { forest.children(v).len() } else { 0 },
                sent_up: false,
                result: None,
            }
        })
        .collect();
    sim.run(&mut progs, 4 * n + 4, &Multiplicity::Unit)?;
    Ok(progs.into_iter().map(|p| p.result.expect("tree reduce completes")).collect())
}

/// Convenience: fold per cluster, returned per cluster root.
pub fn reduce_per_cluster(
    sim: &mut Simulator<'_>,
    forest: &Forest,
    values: &[Item],
    op: AggOp,
) -> Result<BTreeMap<NodeId, Item>, SimError> {
    let per_node = all_reduce(sim, forest, values, op)?;
    Ok(forest.roots().into_iter().map(|r| (r, per_node[r])).collect())
}

struct Locate {
    parent: Option<NodeId>,
    pending: usize,
    found: bool,
    toward: Option<NodeId>,
    sent: bool,
}

impl NodeProgram for Locate {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        for e in ctx.inbox {
            if e.payload[0] == 1 {
                self.found = true;
                self.toward = Some(e.src);
            }
            self.pending -= 1;
        }
        if self.pending == 0 && !self.sent {
            self.sent = true;
            if let Some(p) = self.parent {
                ctx.send_words(p, &[self.found as u64]);
            }
        }
        Status::Idle
    }
}

struct Announce {
    children: Vec<NodeId>,
    start: Option<u64>,
    value: Option<u64>,
}

impl NodeProgram for Announce {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        let mut got = self.start.take();
        for e in ctx.inbox {
            got = Some(e.payload[0]);
        }
        if let Some(x) = got {
            if self.value.is_none() {
                self.value = Some(x);
                for &c in &self.children {
                    ctx.send_words(c, &[x]);
                }
            }
        }
        Status::Idle
    }
}

/// Merges each joiner cluster into a receiver cluster along an edge
/// `(u, w)` with `u` in the joiner and `w` in the receiver: the joiner tree
/// is re-rooted at `u`, `u` hangs below `w`, and every joiner node learns
/// the receiver's root. A joiner must not also receive.
pub fn merge_along(
    sim: &mut Simulator<'_>,
    forest: &Forest,
    joins: &[(NodeId, NodeId)],
) -> Result<Forest, SimError> {
    let n = forest.n();
    let mut is_joiner = vec![false; n];
    let mut target = vec![None; n];
    for &(u, w) in joins {
        let r = forest.root_of(u);
        assert!(!is_joiner[r], "cluster {r} joins twice");
        is_joiner[r] = true;
        target[u] = Some(w);
    }
    // 1. Locate u inside each joiner tree (flag convergecast).
    let mut loc: Vec<Locate> = (0..n)
        .map(|v| {
            let active = is_joiner[forest.root_of(v)];
            Locate {
                parent: if active { forest.parent(v) } else { None },
                pending: if active { forest.children(v).len() } else { 0 },
                found: target[v].is_some(),
                toward: None,
                sent: !active,
            }
        })
        .collect();
    sim.run(&mut loc, 4 * n + 4, &Multiplicity::Unit)?;
    // 2. u and w introduce themselves; w reveals its cluster root.
    let mut sends = Vec::new();
    for &(u, w) in joins {
        sends.push((u, w, Payload::from_slice(&[u as u64])));
        sends.push((w, u, Payload::from_slice(&[forest.root_of(w) as u64])));
    }
    let inboxes = exchange(sim, sends)?;
    // 3. Re-root: path nodes point toward u; u points at w.
    let mut parent = forest.parents().to_vec();
    for v in 0..n {
        if is_joiner[forest.root_of(v)] {
            if let Some(w) = target[v] {
                parent[v] = Some(w);
            } else if loc[v].found {
                parent[v] = loc[v].toward;
            }
        }
    }
    let merged = Forest::from_parents(parent);
    // 4. Announce the new root from u across the re-rooted joiner tree.
    let mut ann: Vec<Announce> = (0..n)
        .map(|_| Announce {
            children: Vec::new(),
            start: None,
            value: None,
        })
        .collect();
    for &(u, _) in joins {
        let root = inboxes[u].first().map(|e| e.payload[0]).expect("receiver replied");
        ann[u].start = Some(root);
    }
    for v in 0..n {
        if is_joiner[forest.root_of(v)] {
            ann[v].children = merged
                .children(v)
                .iter()
                .copied()
                .filter(|&c| is_joiner[forest.root_of(c)])
                .collect();
        }
    }
    sim.run(&mut ann, 4 * n + 4, &Multiplicity::Unit)?;
    Ok(merged)
}
