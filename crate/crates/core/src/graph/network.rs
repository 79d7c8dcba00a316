use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GraphError;
use crate::sim::NodeId;

pub type Weight = u64;

/// Undirected simple communication graph with optional edge weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkGraph {
    n: usize,
    /// Edges as `(u, v)` with `u < v`, sorted.
    edges: Vec<(NodeId, NodeId)>,
    weights: Option<Vec<Weight>>,
    #[serde(skip)]
    adj: Vec<Vec<NodeId>>,
    #[serde(skip)]
    adj_edge: Vec<Vec<usize>>,
}

impl NetworkGraph {
    /// Builds a graph; rejects self-loops, parallel edges, out-of-range
    /// endpoints, zero or oversized weights and disconnected inputs.
    pub fn new(n: usize, edges: Vec<(NodeId, NodeId)>) -> Result<Self, GraphError> {
        Self::build(n, edges.into_iter().map(|(u, v)| (u, v, None)).collect())
    }

    pub fn weighted(n: usize, edges: Vec<(NodeId, NodeId, Weight)>) -> Result<Self, GraphError> {
        Self::build(n, edges.into_iter().map(|(u, v, w)| (u, v, Some(w))).collect())
    }

    fn build(n: usize, raw: Vec<(NodeId, NodeId, Option<Weight>)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let weighted = raw.first().is_some_and(|e| e.2.is_some());
        let cap = (n as u128).pow(3).min(u64::MAX as u128) as u64;
        let mut map: BTreeMap<(NodeId, NodeId), Option<Weight>> = BTreeMap::new();
        for (u, v, w) in raw {
            if u >= n || v >= n {
                return Err(GraphError::NodeOutOfRange(u.max(v), n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if w.is_some() != weighted {
                return Err(GraphError::MixedWeights);
            }
            if let Some(w) = w {
                if w == 0 || w > cap.max(1) {
                    return Err(GraphError::BadWeight(w));
                }
            }
            let key = (u.min(v), u.max(v));
            if map.insert(key, w).is_some() {
                return Err(GraphError::ParallelEdge(key.0, key.1));
            }
        }
        let edges: Vec<_> = map.keys().copied().collect();
        let weights = weighted.then(|| map.values().map(|w| w.unwrap()).collect());
        let mut g = NetworkGraph {
            n,
            edges,
            weights,
            adj: Vec::new(),
            adj_edge: Vec::new(),
        };
        g.index();
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    fn index(&mut self) {
        let mut adj: Vec<Vec<(NodeId, usize)>> = vec![Vec::new(); self.n];
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, k));
            adj[v].push((u, k));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        self.adj = adj.iter().map(|a| a.iter().map(|x| x.0).collect()).collect();
        self.adj_edge = adj.iter().map(|a| a.iter().map(|x| x.1).collect()).collect();
    }

    /// Restores adjacency after deserialisation.
    pub fn reindex(mut self) -> Self {
        self.index();
        self
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v - 1, v)).collect()).expect("path is valid")
    }

    pub fn star(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (0, v)).collect()).expect("star is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn weight(&self, edge: usize) -> Option<Weight> {
        self.weights.as_ref().map(|w| w[edge])
    }

    /// Sorted neighbour list.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    /// Edge indices aligned with [`neighbors`](Self::neighbors).
    pub fn incident_edges(&self, v: NodeId) -> &[usize] {
        &self.adj_edge[v]
    }

    pub fn edge_index(&self, u: NodeId, v: NodeId) -> Option<usize> {
        let a = &self.adj[u];
        a.binary_search(&v).ok().map(|k| self.adj_edge[u][k])
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Hop distances from `src` (centralised).
    pub fn bfs_distances(&self, src: NodeId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::from([src]);
        dist[src] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Exact diameter by all-sources BFS.
    pub fn diameter(&self) -> usize {
        (0..self.n)
            .map(|s| self.bfs_distances(s).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

/// Assignment of nodes to parts, with dense part indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    part_of: Vec<usize>,
    /// Label of each dense part as given by the caller.
    labels: Vec<u64>,
    #[serde(skip)]
    members: Vec<Vec<NodeId>>,
}

impl Partition {
    /// Builds from arbitrary labels; parts are numbered by first appearance
    /// in increasing label order.
    pub fn from_labels(labels: &[u64]) -> Self {
        let mut distinct: Vec<u64> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let part_of = labels
            .iter()
            .map(|l| distinct.binary_search(l).unwrap())
            .collect();
        let mut p = Partition {
            part_of,
            labels: distinct,
            members: Vec::new(),
        };
        p.index();
        p
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n as u64).collect::<Vec<_>>())
    }

    pub fn whole(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    fn index(&mut self) {
        let mut members = vec![Vec::new(); self.labels.len()];
        for (v, &p) in self.part_of.iter().enumerate() {
            members[p].push(v);
        }
        self.members = members;
    }

    pub fn reindex(mut self) -> Self {
        self.index();
        self
    }

    pub fn n(&self) -> usize {
        self.part_of.len()
    }

    pub fn num_parts(&self) -> usize {
        self.labels.len()
    }

    pub fn part_of(&self, v: NodeId) -> usize {
        self.part_of[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.part_of
    }

    pub fn label(&self, part: usize) -> u64 {
        self.labels[part]
    }

    /// Sorted members of a part.
    pub fn members(&self, part: usize) -> &[NodeId] {
        &self.members[part]
    }

    pub fn size(&self, part: usize) -> usize {
        self.members[part].len()
    }

    /// Checks every part induces a connected subgraph of `g`.
    pub fn parts_connected(&self, g: &NetworkGraph) -> bool {
        (0..self.num_parts()).all(|i| {
            let mem = &self.members[i];
            let mut seen = std::collections::BTreeSet::from([mem[0]]);
            let mut stack = vec![mem[0]];
            while let Some(u) = stack.pop() {
                for &w in g.neighbors(u) {
                    if self.part_of[w] == i && seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
            seen.len() == mem.len()
        })
    }

    pub fn validate(&self, g: &NetworkGraph) -> Result<(), GraphError> {
        if self.n() != g.n() {
            return Err(GraphError::PartitionSize(self.n(), g.n()));
        }
        if !self.parts_connected(g) {
            return Err(GraphError::DisconnectedPart);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_graphs() {
        assert_eq!(NetworkGraph::new(2, vec![(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            NetworkGraph::new(2, vec![(0, 1), (1, 0)]),
            Err(GraphError::ParallelEdge(0, 1))
        );
        assert_eq!(NetworkGraph::new(3, vec![(0, 1)]), Err(GraphError::Disconnected));
        assert_eq!(
            NetworkGraph::weighted(2, vec![(0, 1, 0)]),
            Err(GraphError::BadWeight(0))
        );
        assert_eq!(
            NetworkGraph::weighted(2, vec![(0, 1, 9)]),
            Err(GraphError::BadWeight(9))
        );
    }

    #[test]
    fn adjacency_is_sorted() {
        let g = NetworkGraph::new(4, vec![(3, 0), (0, 1), (2, 0)]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2, 3]);
        assert!(g.has_edge(2, 0) && !g.has_edge(1, 2));
        assert_eq!(g.edge_index(0, 3), Some(2));
        assert_eq!(g.diameter(), 2);
    }

    #[test]
    fn partition_from_labels() {
        let p = Partition::from_labels(&[9, 4, 9, 4, 7]);
        assert_eq!(p.num_parts(), 3);
        assert_eq!(p.members(0), &[1, 3]);
        assert_eq!(p.label(2), 9);
        let g = NetworkGraph::path(5);
        assert!(!p.parts_connected(&g));
        assert!(Partition::from_labels(&[1, 1, 2, 2, 2]).parts_connected(&g));
    }
}
