//! Centralized reference implementations. Nothing here touches the
//! simulator.

use std::collections::BTreeSet;

use crate::agg::AggOp;
use crate::graph::{NetworkGraph, Partition};
use crate::sim::{NodeId, Word};

/// Aggregate of every part, by a direct fold over its members.
pub fn oracle_pa(partition: &Partition, values: &[Word], op: AggOp) -> Vec<Word> {
    (0..partition.num_parts())
        .map(|i| {
            op.fold(partition.members(i).iter().map(|&v| op.lift(v, values[v])))
                .word
        })
        .collect()
}

/// Per-node view of [`oracle_pa`].
pub fn oracle_pa_per_node(partition: &Partition, values: &[Word], op: AggOp) -> Vec<Word> {
    let per_part = oracle_pa(partition, values, op);
    (0..partition.n()).map(|v| per_part[partition.part_of(v)]).collect()
}

/// Total order on edges: (weight, smaller endpoint, larger endpoint).
pub fn edge_key(g: &NetworkGraph, e: usize) -> (u64, NodeId, NodeId) {
    let (u, v) = g.edges()[e];
    (g.weight(e).unwrap_or(1), u.min(v), u.max(v))
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Minimum spanning tree (edge indices, sorted) by greedy insertion in key
/// order.
pub fn oracle_mst(g: &NetworkGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_by_key(|&e| edge_key(g, e));
    let mut dsu = Dsu::new(g.n());
    let mut out: Vec<usize> = order
        .into_iter()
        .filter(|&e| {
            let (u, v) = g.edges()[e];
            dsu.union(u, v)
        })
        .collect();
    out.sort_unstable();
    out
}

/// Second method: an edge is in the MST iff it is the lightest edge across
/// some cut, i.e. iff its endpoints are disconnected using strictly lighter
/// edges only.
pub fn oracle_mst_cut_rule(g: &NetworkGraph) -> Vec<usize> {
    let keys: Vec<_> = (0..g.m()).map(|e| edge_key(g, e)).collect();
    (0..g.m())
        .filter(|&e| {
            let (s, t) = g.edges()[e];
            let mut seen = vec![false; g.n()];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(x) = stack.pop() {
                for (&f, &y) in g.incident_edges(x).iter().zip(g.neighbors(x)) {
                    if keys[f] < keys[e] && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            !seen[t]
        })
        .collect()
}

/// Label per node: minimum id of its component in the subgraph given by
/// `edges`.
pub fn oracle_component_labels(n: usize, edges: &[(NodeId, NodeId)]) -> Vec<NodeId> {
    let mut dsu = Dsu::new(n);
    for &(u, v) in edges {
        dsu.union(u, v);
    }
    (0..n).map(|v| dsu.find(v)).collect()
}

/// Reference trace of the doubling path shortcut. Index 0 is the source
/// (height 1), the last index the sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathTrace {
    pub final_sets: Vec<BTreeSet<u64>>,
    /// `broken[k]`: the edge above the node at index k was broken.
    pub broken: Vec<bool>,
    /// Part ids transmitted over the edge above each node.
    pub carried: Vec<BTreeSet<u64>>,
    /// What the sink passes on over its own parent edge.
    pub forwarded: BTreeSet<u64>,
}

fn trailing_zeros(h: usize) -> usize {
    h.trailing_zeros() as usize
}

pub fn oracle_path_shortcut(sets: &[BTreeSet<u64>], c: usize) -> PathTrace {
    let len = sets.len();
    let mut iterations = 0;
    while (1usize << iterations) < len {
        iterations += 1;
    }
    // 1-based heights.
    let mut s: Vec<BTreeSet<u64>> = std::iter::once(BTreeSet::new()).chain(sets.iter().cloned()).collect();
    let mut broken = vec![false; len + 1];
    let mut carried = vec![BTreeSet::new(); len + 1];
    for i in 0..iterations {
        let before = s.clone();
        for v in 1..=len {
            if trailing_zeros(v) != i {
                continue;
            }
            if before[v].len() >= 2 * c {
                broken[v] = true;
                s[v].clear();
            } else if v < len {
                let u = (v + (1 << i)).min(len);
                let mut w = v;
                while w < u && !broken[w] {
                    carried[w].extend(before[v].iter().copied());
                    w += 1;
                }
                if w == u {
                    let moved = before[v].clone();
                    s[u].extend(moved);
                }
            }
        }
    }
    let forwarded = if broken[len] || s[len].len() >= 2 * c { BTreeSet::new() } else { s[len].clone() };
    PathTrace {
        final_sets: s[1..].to_vec(),
        broken: broken[1..].to_vec(),
        carried: carried[1..].to_vec(),
        forwarded,
    }
}
