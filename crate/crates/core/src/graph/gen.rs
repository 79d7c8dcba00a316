use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraphError, NetworkGraph, Partition};
use crate::sim::NodeId;

/// A `depth × width` grid with an apex attached to the top row.
#[derive(Clone, Debug)]
pub struct GridWithApex {
    pub graph: NetworkGraph,
    /// One part per row; the apex sits alone in the last part.
    pub partition: Partition,
    pub depth: usize,
    pub width: usize,
}

impl GridWithApex {
    pub const APEX: NodeId = 0;

    pub fn node(&self, row: usize, col: usize) -> NodeId {
        1 + row * self.width + col
    }

    /// Dense indices of the row parts.
    pub fn row_parts(&self) -> std::ops::Range<usize> {
        0..self.depth
    }

    pub fn apex_part(&self) -> usize {
        self.depth
    }
}

/// Node 0 is the apex; grid node `(r, c)` has id `1 + r·w + c`, row 0 on top.
pub fn gen_grid_with_apex(depth: usize, width: usize) -> GridWithApex {
    assert!(depth >= 1 && width >= 1, "grid needs positive dimensions");
    let id = |r: usize, c: usize| 1 + r * width + c;
    let mut edges = Vec::new();
    for c in 0..width {
        edges.push((0, id(0, c)));
    }
    for r in 0..depth {
        for c in 0..width {
            if c + 1 < width {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < depth {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    let n = depth * width + 1;
    let graph = NetworkGraph::new(n, edges).expect("grid is valid");
    let mut labels = vec![depth as u64; n];
    for (v, l) in labels.iter_mut().enumerate().skip(1) {
        *l = ((v - 1) / width) as u64;
    }
    GridWithApex {
        graph,
        partition: Partition::from_labels(&labels),
        depth,
        width,
    }
}

/// Random spanning tree (each node in a random order attaches to a uniformly
/// chosen earlier node) plus every other pair independently with
/// probability `p`.
pub fn gen_random_connected(n: usize, p: f64, seed: u64) -> NetworkGraph {
    assert!(n >= 1, "need at least one node");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = std::collections::BTreeSet::new();
    for k in 1..n {
        let u = order[rng.gen_range(0..k)];
        let v = order[k];
        edges.insert((u.min(v), u.max(v)));
    }
    if p > 0.0 {
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p.min(1.0)) {
                    edges.insert((u, v));
                }
            }
        }
    }
    NetworkGraph::new(n, edges.into_iter().collect()).expect("spanning tree keeps it connected")
}

/// Like [`gen_random_connected`] with weights drawn uniformly from
/// `1..=max_weight` (clamped to n³).
pub fn gen_random_weighted(n: usize, p: f64, max_weight: u64, seed: u64) -> NetworkGraph {
    let g = gen_random_connected(n, p, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_3e16);
    let cap = ((n as u64).saturating_pow(3)).max(1).min(max_weight.max(1));
    let edges = g
        .edges()
        .iter()
        .map(|&(u, v)| (u, v, rng.gen_range(1..=cap)))
        .collect();
    NetworkGraph::weighted(n, edges).expect("same topology")
}

/// Grows `parts` connected parts by seeded multi-source flooding: random
/// distinct seeds, then breadth-first growth where each node joins the part
/// that reaches it first (seed order breaks ties).
pub fn gen_random_connected_partition(
    g: &NetworkGraph,
    parts: usize,
    seed: u64,
) -> Result<Partition, GraphError> {
    let n = g.n();
    if parts == 0 || parts > n {
        return Err(GraphError::InfeasiblePartCount(parts, n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<NodeId> = (0..n).collect();
    nodes.shuffle(&mut rng);
    let mut label = vec![u64::MAX; n];
    let mut queue = VecDeque::new();
    for (k, &s) in nodes[..parts].iter().enumerate() {
        label[s] = k as u64;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if label[w] == u64::MAX {
                label[w] = label[u];
                queue.push_back(w);
            }
        }
    }
    Ok(Partition::from_labels(&label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_grid() {
        let gw = gen_grid_with_apex(1, 1);
        assert_eq!((gw.graph.n(), gw.graph.m()), (2, 1));
        assert_eq!(gw.row_parts().len(), 1);
    }

    #[test]
    fn grid_counts() {
        let gw = gen_grid_with_apex(2, 3);
        // Grid edges: rows 2·(3-1) + columns (2-1)·3 = 7, plus 3 apex edges.
        assert_eq!(gw.graph.n(), 7);
        assert_eq!(gw.graph.m(), 7 + 3);
        for r in gw.row_parts() {
            assert_eq!(gw.partition.size(r), 3);
        }
        assert_eq!(gw.partition.members(gw.apex_part()), &[0]);

        let big = gen_grid_with_apex(32, 32);
        assert_eq!(big.graph.n(), 1025);
        assert!(big.row_parts().all(|r| big.partition.size(r) == 32));
        assert!(big.partition.parts_connected(&big.graph));
    }

    #[test]
    fn random_partition_is_connected_and_deterministic() {
        let g = gen_random_connected(1, 0.5, 3);
        let p = gen_random_connected_partition(&g, 1, 3).unwrap();
        assert_eq!((g.n(), p.num_parts()), (1, 1));

        for seed in 0..20 {
            let g = gen_random_connected(50, 0.05, seed);
            let p = gen_random_connected_partition(&g, 5, seed).unwrap();
            assert_eq!(p.num_parts(), 5);
            assert!(p.parts_connected(&g));
            assert_eq!(g, gen_random_connected(50, 0.05, seed));
            assert_eq!(p, gen_random_connected_partition(&g, 5, seed).unwrap());
        }
        assert!(matches!(
            gen_random_connected_partition(&g, 2, 0),
            Err(GraphError::InfeasiblePartCount(2, 1))
        ));
    }
}
