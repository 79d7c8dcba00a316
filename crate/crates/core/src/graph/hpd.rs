use std::collections::BTreeMap;

use super::RootedTree;
use crate::sim::{Ctx, Multiplicity, NodeId, NodeProgram, SimError, Simulator, Status, Word};

/// Heavy path decomposition of a rooted tree.
///
/// The edge from `v` to its parent `u` is heavy iff `size(v) > size(u) / 2`,
/// sizes counting the node itself. Heavy edges are identified by their child.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeavyPathDecomposition {
    heavy: Vec<bool>,
    /// Path id of each node: the topmost node of its heavy path.
    path_of: Vec<NodeId>,
    /// Position from the top of the path (top = 0).
    offset: Vec<usize>,
    /// Node lists ordered from source (deepest) to sink (top), keyed by id.
    paths: BTreeMap<NodeId, Vec<NodeId>>,
}

impl HeavyPathDecomposition {
    fn assemble(heavy: Vec<bool>, path_of: Vec<NodeId>, offset: Vec<usize>) -> Self {
        let mut paths: BTreeMap<NodeId, Vec<(usize, NodeId)>> = BTreeMap::new();
        for v in 0..heavy.len() {
            paths.entry(path_of[v]).or_default().push((offset[v], v));
        }
        let paths = paths
            .into_iter()
            .map(|(k, mut l)| {
                l.sort_unstable_by(|a, b| b.cmp(a));
                (k, l.into_iter().map(|x| x.1).collect())
            })
            .collect();
        HeavyPathDecomposition {
            heavy,
            path_of,
            offset,
            paths,
        }
    }

    /// Whether the edge from `v` to its parent is heavy.
    pub fn is_heavy(&self, v: NodeId) -> bool {
        self.heavy[v]
    }

    pub fn heavy_edges(&self) -> Vec<NodeId> {
        (0..self.heavy.len()).filter(|&v| self.heavy[v]).collect()
    }

    pub fn path_of(&self, v: NodeId) -> NodeId {
        self.path_of[v]
    }

    pub fn offset(&self, v: NodeId) -> usize {
        self.offset[v]
    }

    pub fn paths(&self) -> &BTreeMap<NodeId, Vec<NodeId>> {
        &self.paths
    }

    /// Source-to-sink node list of the path with the given id.
    pub fn path(&self, id: NodeId) -> &[NodeId] {
        &self.paths[&id]
    }

    /// Largest number of light edges on a root-to-node path.
    pub fn max_light_depth(&self, tree: &RootedTree) -> usize {
        let mut light = vec![0usize; tree.n()];
        let mut best = 0;
        for v in tree.top_down() {
            if let Some(p) = tree.parent(v) {
                light[v] = light[p] + usize::from(!self.heavy[v]);
                best = best.max(light[v]);
            }
        }
        best
    }
}

/// Centralised decomposition from subtree sizes.
pub fn hpd_oracle(tree: &RootedTree) -> HeavyPathDecomposition {
    let size = tree.subtree_sizes();
    let n = tree.n();
    let mut heavy = vec![false; n];
    let mut path_of = vec![0; n];
    let mut offset = vec![0; n];
    for v in tree.top_down() {
        match tree.parent(v) {
            Some(p) if 2 * size[v] > size[p] => {
                heavy[v] = true;
                path_of[v] = path_of[p];
                offset[v] = offset[p] + 1;
            }
            _ => path_of[v] = v,
        }
    }
    HeavyPathDecomposition::assemble(heavy, path_of, offset)
}

/// Distributed decomposition: one subtree-size convergecast followed by one
/// broadcast carrying (heavy flag, path id, offset) to each child.
pub fn heavy_path_decomposition(
    sim: &mut Simulator<'_>,
    tree: &RootedTree,
) -> Result<HeavyPathDecomposition, SimError> {
    let n = tree.n();
    let mut progs: Vec<HpdProgram> = (0..n)
        .map(|v| HpdProgram {
            parent: tree.parent(v),
            children: tree.children(v).to_vec(),
            child_size: BTreeMap::new(),
            size: 1,
            heavy: false,
            path: v,
            offset: 0,
            sent_up: false,
        })
        .collect();
    sim.run(&mut progs, 4 * n + 4, &Multiplicity::Unit)?;
    Ok(HeavyPathDecomposition::assemble(
        progs.iter().map(|p| p.heavy).collect(),
        progs.iter().map(|p| p.path).collect(),
        progs.iter().map(|p| p.offset).collect(),
    ))
}

struct HpdProgram {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    child_size: BTreeMap<NodeId, usize>,
    size: usize,
    heavy: bool,
    path: NodeId,
    offset: usize,
    sent_up: bool,
}

impl HpdProgram {
    fn broadcast(&self, ctx: &mut Ctx<'_>) {
        for &c in &self.children {
            let heavy = 2 * self.child_size[&c] > self.size;
            if heavy {
                ctx.send_words(c, &[1, self.path as Word, (self.offset + 1) as Word]);
            } else {
                ctx.send_words(c, &[0]);
            }
        }
    }
}

impl NodeProgram for HpdProgram {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        for e in ctx.inbox {
            if Some(e.src) == self.parent {
                self.heavy = e.payload[0] == 1;
                if self.heavy {
                    self.path = e.payload[1] as NodeId;
                    self.offset = e.payload[2] as usize;
                }
                self.broadcast(ctx);
            } else {
                self.child_size.insert(e.src, e.payload[0] as usize);
                self.size += e.payload[0] as usize;
            }
        }
        if !self.sent_up && self.child_size.len() == self.children.len() {
            self.sent_up = true;
            match self.parent {
                Some(p) => ctx.send_words(p, &[self.size as Word]),
                None => self.broadcast(ctx),
            }
        }
        Status::Idle
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_tree_oracle, NetworkGraph};

    /// Direct descendant counting, independent of the decomposition code.
    fn heavy_by_counting(tree: &RootedTree) -> Vec<bool> {
        let n = tree.n();
        let count = |v: NodeId| (0..n).filter(|&x| tree.is_ancestor(v, x)).count();
        (0..n)
            .map(|v| tree.parent(v).is_some_and(|p| 2 * count(v) > count(p)))
            .collect()
    }

    fn check(g: &NetworkGraph, root: NodeId) -> (RootedTree, HeavyPathDecomposition) {
        let t = bfs_tree_oracle(g, root).unwrap();
        let mut sim = Simulator::new(g);
        let d = heavy_path_decomposition(&mut sim, &t).unwrap();
        assert_eq!(d, hpd_oracle(&t));
        let expect: Vec<NodeId> = (0..t.n()).filter(|&v| heavy_by_counting(&t)[v]).collect();
        assert_eq!(d.heavy_edges(), expect);
        assert_eq!(sim.report().messages, 2 * (t.n() as u64 - 1));
        let total: usize = d.paths().values().map(Vec::len).sum();
        assert_eq!(total, t.n());
        (t, d)
    }

    #[test]
    fn two_nodes_have_no_heavy_edge() {
        let (_, d) = check(&NetworkGraph::path(2), 0);
        assert!(d.heavy_edges().is_empty());
    }

    #[test]
    fn path_of_eight() {
        let (_, d) = check(&NetworkGraph::path(8), 0);
        // size(v) = 8 - v, heavy iff 2(8-v) > 9-v, i.e. v < 7.
        assert_eq!(d.heavy_edges(), (1..7).collect::<Vec<_>>());
        assert_eq!(d.path(0), &[6, 5, 4, 3, 2, 1, 0]);
        assert_eq!(d.path(7), &[7]);
    }

    #[test]
    fn balanced_binary_tree() {
        let g = NetworkGraph::new(15, (1..15).map(|v| ((v - 1) / 2, v)).collect()).unwrap();
        let (t, d) = check(&g, 0);
        assert!(d.heavy_edges().is_empty());
        assert!(d.max_light_depth(&t) <= 3);
    }

    #[test]
    fn random_trees_respect_light_bound() {
        for seed in 0..10 {
            let g = crate::graph::gen_random_connected(200, 0.01, seed);
            let (t, d) = check(&g, 0);
            assert!(d.max_light_depth(&t) <= (200f64).log2().floor() as usize);
            for v in 0..t.n() {
                assert!(t.children(v).iter().filter(|&&c| d.is_heavy(c)).count() <= 1);
            }
        }
    }
}
