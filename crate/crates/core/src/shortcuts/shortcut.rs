use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{GraphError, Partition, RootedTree};
use crate::sim::NodeId;

/// Tree-restricted shortcut: for each part, a set of tree edges. A tree edge
/// is named by its child endpoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortcut {
    parts: Vec<Vec<NodeId>>,
}

impl Shortcut {
    pub fn empty(num_parts: usize) -> Self {
        Shortcut {
            parts: vec![Vec::new(); num_parts],
        }
    }

    /// Every part gets every tree edge.
    pub fn whole_tree(tree: &RootedTree, num_parts: usize) -> Self {
        let all: Vec<NodeId> = (0..tree.n()).filter(|&v| v != tree.root()).collect();
        Shortcut {
            parts: vec![all; num_parts],
        }
    }

    pub fn from_sets(parts: Vec<Vec<NodeId>>) -> Self {
        let mut s = Shortcut { parts };
        for p in &mut s.parts {
            p.sort_unstable();
            p.dedup();
        }
        s
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    /// Sorted child ids of the tree edges assigned to `part`.
    pub fn edges(&self, part: usize) -> &[NodeId] {
        &self.parts[part]
    }

    pub fn contains(&self, part: usize, child: NodeId) -> bool {
        self.parts[part].binary_search(&child).is_ok()
    }

    pub fn set_edges(&mut self, part: usize, mut edges: Vec<NodeId>) {
        edges.sort_unstable();
        edges.dedup();
        self.parts[part] = edges;
    }

    /// Checks H_i ⊆ E[T] for every part.
    pub fn validate(&self, tree: &RootedTree) -> Result<(), GraphError> {
        for (i, es) in self.parts.iter().enumerate() {
            for &c in es {
                if c >= tree.n() || tree.parent(c).is_none() {
                    return Err(GraphError::InvalidTree(format!(
                        "part {i} uses {c}, which is not the child end of a tree edge"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Load per tree edge (keyed by child) and the maximum load.
    pub fn congestion(&self) -> (usize, BTreeMap<NodeId, usize>) {
        let mut load: BTreeMap<NodeId, usize> = BTreeMap::new();
        for es in &self.parts {
            for &c in es {
                *load.entry(c).or_default() += 1;
            }
        }
        (load.values().copied().max().unwrap_or(0), load)
    }

    pub fn total_edges(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    /// Writes `part_label u v` lines with `v` the child endpoint.
    pub fn to_text(&self, tree: &RootedTree, partition: &Partition) -> String {
        let mut s = String::new();
        for (i, es) in self.parts.iter().enumerate() {
            for &c in es {
                let p = tree.parent(c).expect("validated");
                writeln!(s, "{} {} {}", partition.label(i), p, c).unwrap();
            }
        }
        s
    }

    pub fn from_text(
        text: &str,
        tree: &RootedTree,
        partition: &Partition,
    ) -> Result<Self, GraphError> {
        let by_label: BTreeMap<u64, usize> = (0..partition.num_parts())
            .map(|i| (partition.label(i), i))
            .collect();
        let mut out = Shortcut::empty(partition.num_parts());
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let t: Vec<&str> = line.split_whitespace().collect();
            let parse = |k: usize| -> Result<u64, GraphError> {
                t.get(k)
                    .and_then(|x| x.parse().ok())
                    .ok_or_else(|| GraphError::Parse(ln + 1, "expected `part u v`".into()))
            };
            if t.len() != 3 {
                return Err(GraphError::Parse(ln + 1, "expected `part u v`".into()));
            }
            let label = parse(0)?;
            let (u, v) = (parse(1)? as usize, parse(2)? as usize);
            let part = *by_label
                .get(&label)
                .ok_or_else(|| GraphError::Parse(ln + 1, format!("unknown part {label}")))?;
            let child = if u < tree.n() && tree.parent(u) == Some(v) {
                u
            } else if v < tree.n() && tree.parent(v) == Some(u) {
                v
            } else {
                return Err(GraphError::Parse(ln + 1, format!("{u}-{v} is not a tree edge")));
            };
            out.parts[part].push(child);
        }
        for p in &mut out.parts {
            p.sort_unstable();
            p.dedup();
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    /// Member of minimum depth (unique, blocks being subtrees of T).
    pub root: NodeId,
    pub members: Vec<NodeId>,
}

/// Blocks of every part: connected components of (P_i ∪ V(H_i), H_i).
#[derive(Clone, Debug)]
pub struct BlockStructure {
    blocks: Vec<Vec<Block>>,
    index: Vec<BTreeMap<NodeId, usize>>,
}

impl BlockStructure {
    pub fn compute(tree: &RootedTree, partition: &Partition, shortcut: &Shortcut) -> Self {
        let np = partition.num_parts();
        let mut blocks = Vec::with_capacity(np);
        let mut index = Vec::with_capacity(np);
        for i in 0..np {
            // Each block is a subtree of T; walk up H_i edges to its top node.
            let mut nodes: Vec<NodeId> = partition.members(i).to_vec();
            for &c in shortcut.edges(i) {
                nodes.push(c);
                nodes.push(tree.parent(c).unwrap());
            }
            nodes.sort_unstable();
            nodes.dedup();
            let mut top: BTreeMap<NodeId, NodeId> = BTreeMap::new();
            let mut order = nodes.clone();
            order.sort_by_key(|&v| (tree.depth(v), v));
            for &v in &order {
                let t = if shortcut.contains(i, v) {
                    top[&tree.parent(v).unwrap()]
                } else {
                    v
                };
                top.insert(v, t);
            }
            let mut by_root: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
            for &v in &nodes {
                by_root.entry(top[&v]).or_default().push(v);
            }
            let mut roots: Vec<NodeId> = by_root.keys().copied().collect();
            roots.sort_by_key(|&r| (tree.depth(r), r));
            let pos: BTreeMap<NodeId, usize> =
                roots.iter().enumerate().map(|(k, &r)| (r, k)).collect();
            let list: Vec<Block> = roots
                .iter()
                .map(|&r| Block {
                    root: r,
                    members: by_root.remove(&r).unwrap(),
                })
                .collect();
            index.push(nodes.iter().map(|&v| (v, pos[&top[&v]])).collect());
            blocks.push(list);
        }
        BlockStructure { blocks, index }
    }

    pub fn num_parts(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self, part: usize) -> &[Block] {
        &self.blocks[part]
    }

    /// Block of `part` containing `v`, if `v ∈ P_i ∪ V(H_i)`.
    pub fn block_of(&self, part: usize, v: NodeId) -> Option<usize> {
        self.index[part].get(&v).copied()
    }

    /// b_i.
    pub fn count(&self, part: usize) -> usize {
        self.blocks[part].len()
    }

    /// b = max_i b_i.
    pub fn parameter(&self) -> usize {
        (0..self.num_parts()).map(|i| self.count(i)).max().unwrap_or(0)
    }

    /// Number of distinct blocks of `part` containing at least one of `nodes`.
    pub fn count_hit<I: IntoIterator<Item = NodeId>>(&self, part: usize, nodes: I) -> usize {
        let mut hit: Vec<usize> = nodes
            .into_iter()
            .filter_map(|v| self.block_of(part, v))
            .collect();
        hit.sort_unstable();
        hit.dedup();
        hit.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_tree_oracle, gen_random_connected, gen_random_connected_partition};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Union-find over H_i plus isolated part members.
    fn union_find_counts(tree: &RootedTree, p: &Partition, s: &Shortcut) -> Vec<usize> {
        (0..p.num_parts())
            .map(|i| {
                let mut uf: Vec<usize> = (0..tree.n()).collect();
                fn find(uf: &mut Vec<usize>, x: usize) -> usize {
                    if uf[x] != x {
                        let r = find(uf, uf[x]);
                        uf[x] = r;
                    }
                    uf[x]
                }
                let mut present = vec![false; tree.n()];
                for &v in p.members(i) {
                    present[v] = true;
                }
                for &c in s.edges(i) {
                    let q = tree.parent(c).unwrap();
                    present[c] = true;
                    present[q] = true;
                    let (a, b) = (find(&mut uf, c), find(&mut uf, q));
                    uf[a] = b;
                }
                let mut roots: Vec<usize> = (0..tree.n())
                    .filter(|&v| present[v])
                    .map(|v| find(&mut uf, v))
                    .collect();
                roots.sort_unstable();
                roots.dedup();
                roots.len()
            })
            .collect()
    }

    #[test]
    fn congestion_basics() {
        let g = crate::graph::NetworkGraph::path(6);
        let t = bfs_tree_oracle(&g, 0).unwrap();
        assert_eq!(Shortcut::empty(3).congestion().0, 0);
        let s = Shortcut::whole_tree(&t, 4);
        let (c, load) = s.congestion();
        assert_eq!(c, 4);
        assert!(load.values().all(|&l| l == 4));
    }

    #[test]
    fn random_congestion_matches_second_count() {
        let g = gen_random_connected(40, 0.1, 9);
        let t = bfs_tree_oracle(&g, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sets: Vec<Vec<NodeId>> = (0..7)
            .map(|_| (1..40).filter(|_| rng.gen_bool(0.3)).collect())
            .collect();
        let s = Shortcut::from_sets(sets.clone());
        s.validate(&t).unwrap();
        let mut per_edge = vec![0usize; 40];
        for set in &sets {
            for &c in set {
                per_edge[c] += 1;
            }
        }
        let (c, load) = s.congestion();
        assert_eq!(c, per_edge.iter().copied().max().unwrap());
        for (v, &l) in per_edge.iter().enumerate() {
            assert_eq!(load.get(&v).copied().unwrap_or(0), l);
        }
    }

    #[test]
    fn block_counts() {
        let g = crate::graph::NetworkGraph::path(3);
        let t = bfs_tree_oracle(&g, 0).unwrap();
        let p = Partition::whole(3);
        let bs = BlockStructure::compute(&t, &p, &Shortcut::empty(1));
        assert_eq!(bs.count(0), 3);
        let bs = BlockStructure::compute(&t, &p, &Shortcut::from_sets(vec![vec![1, 2]]));
        assert_eq!(bs.count(0), 1);
        assert_eq!(bs.blocks(0)[0].root, 0);
    }

    #[test]
    fn blocks_match_union_find() {
        for seed in 0..10 {
            let g = gen_random_connected(60, 0.05, seed);
            let t = bfs_tree_oracle(&g, 0).unwrap();
            let p = gen_random_connected_partition(&g, 4, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sets = (0..4)
                .map(|_| (1..60).filter(|_| rng.gen_bool(0.25)).collect())
                .collect();
            let s = Shortcut::from_sets(sets);
            let bs = BlockStructure::compute(&t, &p, &s);
            let uf = union_find_counts(&t, &p, &s);
            for i in 0..4 {
                assert_eq!(bs.count(i), uf[i]);
                let total: usize = bs.blocks(i).iter().map(|b| b.members.len()).sum();
                assert_eq!(total, bs.index[i].len());
                for b in bs.blocks(i) {
                    let min = b.members.iter().map(|&v| (t.depth(v), v)).min().unwrap();
                    assert_eq!(min.1, b.root);
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let g = gen_random_connected(30, 0.1, 2);
        let tr = bfs_tree_oracle(&g, 0).unwrap();
        let p = gen_random_connected_partition(&g, 3, 2).unwrap();
        let s = Shortcut::from_sets(vec![vec![1, 2, 5], vec![], vec![7, 29]]);
        s.validate(&tr).unwrap();
        let back = Shortcut::from_text(&s.to_text(&tr, &p), &tr, &p).unwrap();
        assert_eq!(back, s);
        assert!(Shortcut::from_text("0 0 0\n", &tr, &p).is_err());
    }
}
