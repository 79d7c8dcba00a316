use super::division_det::{subpart_division_det, DivisionError};
use crate::graph::{NetworkGraph, Partition};
use crate::sim::{NodeId, Simulator};

/// k-dominating set: representatives of a deterministic division of the
/// whole graph with completeness threshold ⌈k/6⌉.
pub fn k_dominating_set(
    sim: &mut Simulator<'_>,
    g: &NetworkGraph,
    k: usize,
) -> Result<Vec<NodeId>, DivisionError> {
    let n = g.n();
    let threshold = k.div_ceil(6).max(1);
    let (d, _) = sim.with_phase("kdom", |s| {
        subpart_division_det(s, g, &Partition::whole(n), threshold)
    })?;
    Ok((0..n).filter(|&v| d.is_rep(v)).collect())
}

/// Largest distance from any node to the set, by multi-source BFS.
pub fn domination_radius(g: &NetworkGraph, set: &[NodeId]) -> usize {
    let mut dist = vec![usize::MAX; g.n()];
    let mut queue = std::collections::VecDeque::new();
    for &s in set {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist.into_iter().max().unwrap_or(0)
}
