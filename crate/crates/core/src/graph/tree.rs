use serde::{Deserialize, Serialize};

use super::{GraphError, NetworkGraph};
use crate::sim::{Ctx, Multiplicity, NodeId, NodeProgram, SimError, Simulator, Status, Word};

/// Rooted spanning tree of the network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    depth: Vec<usize>,
    children: Vec<Vec<NodeId>>,
    height: usize,
}

impl RootedTree {
    /// Builds from a parent array, checking every parent edge is a graph
    /// edge and the result is a single tree rooted at `root`.
    pub fn from_parents(
        g: &NetworkGraph,
        root: NodeId,
        parent: Vec<Option<NodeId>>,
    ) -> Result<Self, GraphError> {
        let n = g.n();
        if parent.len() != n || parent[root].is_some() {
            return Err(GraphError::InvalidTree("root or length mismatch".into()));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            match p {
                Some(p) if g.has_edge(v, *p) => children[*p].push(v),
                Some(_) => return Err(GraphError::InvalidTree(format!("parent of {v} not adjacent"))),
                None if v != root => {
                    return Err(GraphError::InvalidTree(format!("{v} has no parent")))
                }
                None => {}
            }
        }
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut order = vec![root];
        let mut k = 0;
        while k < order.len() {
            let u = order[k];
            k += 1;
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                order.push(c);
            }
        }
        if order.len() != n {
            return Err(GraphError::InvalidTree("cycle in parent pointers".into()));
        }
        let height = depth.iter().copied().max().unwrap_or(0);
        Ok(RootedTree {
            root,
            parent,
            depth,
            children,
            height,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    pub fn depths(&self) -> &[usize] {
        &self.depth
    }

    /// Sorted children.
    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    /// Depth bound D_T (maximum depth).
    pub fn height(&self) -> usize {
        self.height
    }

    /// Nodes in non-decreasing depth order (root first).
    pub fn top_down(&self) -> Vec<NodeId> {
        let mut order = vec![self.root];
        let mut k = 0;
        while k < order.len() {
            order.extend_from_slice(&self.children[order[k]]);
            k += 1;
        }
        order
    }

    /// Subtree sizes, counting the node itself.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1; self.n()];
        for &v in self.top_down().iter().rev() {
            if let Some(p) = self.parent[v] {
                size[p] += size[v];
            }
        }
        size
    }

    /// Whether `a` is an ancestor of `b` (or equal).
    pub fn is_ancestor(&self, a: NodeId, mut b: NodeId) -> bool {
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        a == b
    }
}

/// Centralised BFS tree: parent is the minimum-id neighbour one level up.
pub fn bfs_tree_oracle(g: &NetworkGraph, root: NodeId) -> Result<RootedTree, GraphError> {
    if root >= g.n() {
        return Err(GraphError::NodeOutOfRange(root, g.n()));
    }
    let dist = g.bfs_distances(root);
    let parent = (0..g.n())
        .map(|v| {
            if v == root {
                None
            } else {
                g.neighbors(v).iter().copied().find(|&u| dist[u] + 1 == dist[v])
            }
        })
        .collect();
    RootedTree::from_parents(g, root, parent)
}

const TAG_DEPTH: Word = 0;
const TAG_ACK: Word = 1;

struct BfsNode {
    is_root: bool,
    parent: Option<NodeId>,
    depth: Option<usize>,
}

impl NodeProgram for BfsNode {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        if self.depth.is_none() {
            if self.is_root && ctx.round == 0 {
                self.depth = Some(0);
                for &w in ctx.neighbors {
                    ctx.send_words(w, &[TAG_DEPTH, 0]);
                }
                return Status::Idle;
            }
            let offers: Vec<_> = ctx.inbox.iter().filter(|e| e.payload[0] == TAG_DEPTH).collect();
            if let Some(first) = offers.first() {
                // Inbox is sorted by source, so the first offer is the min-id one.
                let d = first.payload[1] as usize + 1;
                self.depth = Some(d);
                self.parent = Some(first.src);
                ctx.send_words(first.src, &[TAG_ACK]);
                for &w in ctx.neighbors {
                    if !offers.iter().any(|e| e.src == w) {
                        ctx.send_words(w, &[TAG_DEPTH, d as Word]);
                    }
                }
            }
        }
        Status::Idle
    }
}

/// Distributed BFS from `root`. Each node adopts the minimum-id neighbour
/// from which it first hears a depth offer, acknowledges it, and offers its
/// own depth to every neighbour that did not just offer to it.
pub fn build_bfs_tree(sim: &mut Simulator<'_>, root: NodeId) -> Result<RootedTree, BuildError> {
    let g = sim.graph();
    if root >= g.n() {
        return Err(GraphError::NodeOutOfRange(root, g.n()).into());
    }
    let mut progs: Vec<BfsNode> = (0..g.n())
        .map(|v| BfsNode {
            is_root: v == root,
            parent: None,
            depth: None,
        })
        .collect();
    sim.run(&mut progs, 2 * g.n() + 2, &Multiplicity::Unit)?;
    let parent = progs.iter().map(|p| p.parent).collect();
    Ok(RootedTree::from_parents(g, root, parent)?)
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen::gen_random_connected;

    #[test]
    fn path_and_star_depths() {
        let g = NetworkGraph::path(3);
        let t = bfs_tree_oracle(&g, 0).unwrap();
        assert_eq!(t.depths(), &[0, 1, 2]);
        let g = NetworkGraph::star(6);
        let t = bfs_tree_oracle(&g, 0).unwrap();
        assert!((1..6).all(|v| t.depth(v) == 1));
        assert_eq!(t.height(), 1);
    }

    #[test]
    fn distributed_matches_oracle() {
        for seed in 0..5 {
            let g = gen_random_connected(100, 0.05, seed);
            let mut sim = Simulator::new(&g);
            let t = build_bfs_tree(&mut sim, 0).unwrap();
            let o = bfs_tree_oracle(&g, 0).unwrap();
            assert_eq!(t, o);
            let r = sim.report();
            assert!(r.messages <= 2 * g.m() as u64);
            assert!(r.rounds <= t.height() as u64 + 1);
        }
    }

    #[test]
    fn rejects_cyclic_parents() {
        let g = NetworkGraph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let bad = RootedTree::from_parents(&g, 0, vec![None, Some(2), Some(1)]);
        assert!(bad.is_err());
    }
}
