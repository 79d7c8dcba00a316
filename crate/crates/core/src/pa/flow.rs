//! Pointer-driven relays used by the spreading and gathering passes.

use crate::agg::{AggOp, Item};
use crate::sim::{Ctx, Multiplicity, NodeId, NodeProgram, SimError, Simulator, Status};

fn words(x: Item) -> [u64; 2] {
    [x.word, x.id]
}

fn item(p: &[u64]) -> Item {
    Item { word: p[0], id: p[1] }
}

struct Down<'a> {
    children: &'a [NodeId],
    value: Option<Item>,
    sent: bool,
}

impl NodeProgram for Down<'_> {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        if self.value.is_none() {
            if let Some(e) = ctx.inbox.first() {
                self.value = Some(item(&e.payload));
            }
        }
        if let (Some(x), false) = (self.value, self.sent) {
            self.sent = true;
            for &c in self.children {
                ctx.send_words(c, &words(x));
            }
        }
        Status::Idle
    }
}

/// Seeded nodes push their value to their listed children; every receiver
/// adopts the first value it gets and pushes it on.
pub fn push_down(
    sim: &mut Simulator<'_>,
    children: &[Vec<NodeId>],
    seeds: &[(NodeId, Item)],
) -> Result<Vec<Option<Item>>, SimError> {
    if seeds.is_empty() {
        return Ok(vec![None; children.len()]);
    }
    let mut progs: Vec<Down> = children
        .iter()
        .map(|c| Down {
            children: c,
            value: None,
            sent: false,
        })
        .collect();
    for &(v, x) in seeds {
        progs[v].value = Some(x);
    }
    let n = children.len();
    sim.run(&mut progs, n + 2, &Multiplicity::Unit)?;
    Ok(progs.into_iter().map(|p| p.value).collect())
}

struct Gather {
    op: AggOp,
    parent: Option<NodeId>,
    pending: usize,
    acc: Item,
    active: bool,
    sent: bool,
}

impl NodeProgram for Gather {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        for e in ctx.inbox {
            self.acc = self.op.combine(self.acc, item(&e.payload));
            self.pending -= 1;
        }
        if self.active && self.pending == 0 && !self.sent {
            self.sent = true;
            if let Some(p) = self.parent {
                ctx.send_words(p, &words(self.acc));
            }
        }
        Status::Idle
    }
}

/// Convergecast along `parent` pointers over the active nodes: a node sends
/// its fold up once all `expect[v]` children reported. Returns each node's
/// fold (roots hold their tree's total).
pub fn gather_up(
    sim: &mut Simulator<'_>,
    parent: &[Option<NodeId>],
    expect: &[usize],
    active: &[bool],
    values: &[Item],
    op: AggOp,
) -> Result<Vec<Item>, SimError> {
    let n = parent.len();
    if !active.iter().any(|&a| a) {
        return Ok(values.to_vec());
    }
    let mut progs: Vec<Gather> = (0..n)
        .map(|v| Gather {
            op,
            parent: parent[v],
            pending: if active[v] { expect[v] } else { 0 },
            acc: values[v],
            active: active[v],
            sent: false,
        })
        .collect();
    sim.run(&mut progs, n + 2, &Multiplicity::Unit)?;
    Ok(progs.into_iter().map(|p| p.acc).collect())
}

struct Relay {
    parent: Option<NodeId>,
    value: Option<Item>,
    from: Option<NodeId>,
    sent: bool,
}

impl NodeProgram for Relay {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        if self.value.is_none() {
            // Inbox is sorted by source, so the first envelope is the
            // smallest sender of this round.
            if let Some(e) = ctx.inbox.first() {
                self.value = Some(item(&e.payload));
                self.from = Some(e.src);
            }
        }
        if let (Some(x), false) = (self.value, self.sent) {
            self.sent = true;
            if let Some(p) = self.parent {
                ctx.send_words(p, &words(x));
            }
        }
        Status::Idle
    }
}

pub type Relayed = Vec<Option<(Item, Option<NodeId>)>>;

/// First-arrival relay towards the roots of `parent`. Each reached node
/// forwards once; returns the value it holds and the child it first heard
/// from (`None` for seeds).
pub fn relay_up(
    sim: &mut Simulator<'_>,
    parent: &[Option<NodeId>],
    seeds: &[(NodeId, Item)],
) -> Result<Relayed, SimError> {
    let n = parent.len();
    if seeds.is_empty() {
        return Ok(vec![None; n]);
    }
    let mut progs: Vec<Relay> = parent
        .iter()
        .map(|&p| Relay {
            parent: p,
            value: None,
            from: None,
            sent: false,
        })
        .collect();
    for &(v, x) in seeds {
        progs[v].value = Some(x);
    }
    sim.run(&mut progs, n + 2, &Multiplicity::Unit)?;
    Ok(progs
        .into_iter()
        .map(|p| p.value.map(|x| (x, p.from)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NetworkGraph;

    #[test]
    fn relay_then_push_back() {
        // Path 0-1-2-3 with parents towards 0.
        let g = NetworkGraph::path(4);
        let parent = vec![None, Some(0), Some(1), Some(2)];
        let mut sim = Simulator::new(&g);
        let x = AggOp::Min.lift(3, 7);
        let r = relay_up(&mut sim, &parent, &[(3, x)]).unwrap();
        assert_eq!(r[0], Some((x, Some(1))));
        assert_eq!(r[3], Some((x, None)));
        assert_eq!(sim.report().messages, 3);
        let mut kids = vec![Vec::new(); 4];
        for v in 0..4 {
            if let Some((_, Some(c))) = r[v] {
                kids[v].push(c);
            }
        }
        let y = AggOp::Min.lift(0, 1);
        let got = push_down(&mut sim, &kids, &[(0, y)]).unwrap();
        assert!(got.iter().all(|g| *g == Some(y)));
        assert_eq!(sim.report().messages, 6);
    }

    #[test]
    fn gather_sums_active_trees() {
        let g = NetworkGraph::star(5);
        let parent = vec![None, Some(0), Some(0), Some(0), Some(0)];
        let expect = vec![4, 0, 0, 0, 0];
        let vals: Vec<Item> = (0..5).map(|v| AggOp::Sum.lift(v, v as u64)).collect();
        let mut sim = Simulator::new(&g);
        let out = gather_up(&mut sim, &parent, &expect, &[true; 5], &vals, AggOp::Sum).unwrap();
        assert_eq!(out[0].word, 10);
        let mut sim = Simulator::new(&g);
        let out = gather_up(&mut sim, &parent, &expect, &[false; 5], &vals, AggOp::Sum).unwrap();
        assert_eq!(out[0].word, 0);
        assert_eq!(sim.report().messages, 0);
    }
}
