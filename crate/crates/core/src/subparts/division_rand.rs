use rand::Rng;

use super::division_det::{DivisionError, DivisionStats};
use super::SubPartDivision;
use crate::agg::AggOp;
use crate::graph::{NetworkGraph, Partition};
use crate::sim::{exchange, node_rng, NodeId, Payload, SimError, Simulator, Word};
use crate::treecast::{all_reduce, Forest};

/// Sampling constant: representatives are drawn with probability
/// min(1, C_P·ln n / D_T).
pub const C_P: f64 = 4.0;

/// Part-restricted flood from `sources` for at most `radius` rounds.
/// A node joins on the first round it hears anything, choosing the smallest
/// announced id and, among senders of that id, the smallest sender as parent.
/// Returns (origin, parent) per node; `None` origin means not reached.
fn claim(
    sim: &mut Simulator<'_>,
    g: &NetworkGraph,
    partition: &Partition,
    sources: &[NodeId],
    eligible: &[bool],
    radius: usize,
) -> Result<(Vec<Option<NodeId>>, Vec<Option<NodeId>>), SimError> {
    let n = g.n();
    let mut origin: Vec<Option<NodeId>> = vec![None; n];
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut frontier: Vec<NodeId> = Vec::new();
    for &s in sources {
        origin[s] = Some(s);
        frontier.push(s);
    }
    for _ in 0..radius {
        if frontier.is_empty() {
            break;
        }
        let mut sends = Vec::new();
        for &v in &frontier {
            let o = origin[v].unwrap() as Word;
            for &w in g.neighbors(v) {
                if partition.part_of(w) == partition.part_of(v) && eligible[w] && Some(w) != parent[v] {
                    sends.push((v, w, Payload::from_slice(&[o])));
                }
            }
        }
        let inbox = exchange(sim, sends)?;
        frontier.clear();
        for (w, msgs) in inbox.into_iter().enumerate() {
            if origin[w].is_some() || msgs.is_empty() {
                continue;
            }
            let best = msgs.iter().min_by_key(|e| (e.payload[0], e.src)).unwrap();
            origin[w] = Some(best.payload[0] as NodeId);
            parent[w] = Some(best.src);
            frontier.push(w);
        }
    }
    Ok((origin, parent))
}

/// Randomized division. `leaders[i]` is the leader of part `i`, `dt` the
/// depth of the BFS tree.
pub fn subpart_division_random(
    sim: &mut Simulator<'_>,
    g: &NetworkGraph,
    partition: &Partition,
    leaders: &[NodeId],
    dt: usize,
    seed: u64,
) -> Result<(SubPartDivision, DivisionStats), DivisionError> {
    let n = g.n();
    let dt = dt.max(1);
    let all = vec![true; n];
    let mut stats = DivisionStats::default();

    // Part-restricted BFS from each leader; a part is small iff the BFS
    // reaches it completely with at most dt nodes.
    let (reached, bfs_parent) = sim.with_phase("division-bfs", |s| {
        claim(s, g, partition, leaders, &all, dt)
    })?;
    let bfs = Forest::from_parents(bfs_parent.clone());
    let ones: Vec<_> = (0..n)
        .map(|v| AggOp::Sum.lift(v, reached[v].is_some() as Word))
        .collect();
    let sizes = sim.with_phase("division-bfs", |s| all_reduce(s, &bfs, &ones, AggOp::Sum))?;
    let small: Vec<bool> = (0..n)
        .map(|v| reached[v].is_some() && sizes[v].word as usize <= dt)
        .collect();

    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut covered = vec![false; n];
    for v in 0..n {
        if small[v] {
            parent[v] = bfs_parent[v];
            covered[v] = true;
        }
    }

    let lnn = (n.max(2) as f64).ln();
    for attempt in 0..2u64 {
        let eligible: Vec<bool> = (0..n).map(|v| !covered[v]).collect();
        if !eligible.iter().any(|&e| e) {
            break;
        }
        if attempt > 0 {
            stats.retries += 1;
        }
        let p = (C_P * lnn * (1u64 << attempt) as f64 / dt as f64).min(1.0);
        let stream = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let sources: Vec<NodeId> = (0..n)
            .filter(|&v| eligible[v] && node_rng(stream, v).gen_bool(p))
            .collect();
        let (origin, par) = sim.with_phase("division-claim", |s| {
            claim(s, g, partition, &sources, &eligible, dt)
        })?;
        for v in 0..n {
            if eligible[v] && origin[v].is_some() {
                covered[v] = true;
                parent[v] = par[v];
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| !covered[v]) {
        return Err(DivisionError::CoverageFailure(partition.part_of(v)));
    }
    Ok((SubPartDivision::from_parents(parent), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_tree_oracle, gen_random_connected, gen_random_connected_partition};

    fn leaders(p: &Partition) -> Vec<NodeId> {
        (0..p.num_parts()).map(|i| p.members(i)[0]).collect()
    }

    #[test]
    fn small_part_is_one_subpart() {
        let g = NetworkGraph::path(3);
        let p = Partition::whole(3);
        let mut sim = Simulator::new(&g);
        let (d, _) = subpart_division_random(&mut sim, &g, &p, &[1], 10, 0).unwrap();
        d.validate(&g, &p).unwrap();
        assert_eq!(d.reps_of_part(&p, 0), vec![1]);
    }

    #[test]
    fn long_path_part() {
        let dt = 5;
        let n = 20 * dt;
        let g = NetworkGraph::path(n);
        let p = Partition::whole(n);
        for seed in 0..20 {
            let mut sim = Simulator::new(&g);
            let (d, _) = subpart_division_random(&mut sim, &g, &p, &[0], dt, seed).unwrap();
            d.validate(&g, &p).unwrap();
            let k = d.count(&p, 0) as f64;
            assert!(k >= 1.0 && k <= 8.0 * 20.0 * (n as f64).ln());
            assert!(d.diameters().values().all(|&x| x <= 2 * dt));
            // O(m) messages: two floods and one tree reduce.
            assert!(sim.report().messages <= 2 * 2 * g.m() as u64 + 2 * n as u64);
        }
    }

    #[test]
    fn random_instances_cover() {
        for seed in 0..100 {
            let g = gen_random_connected(120, 0.03, seed);
            let p = gen_random_connected_partition(&g, 4, seed).unwrap();
            let dt = bfs_tree_oracle(&g, 0).unwrap().height();
            let mut sim = Simulator::new(&g);
            let (d, _) = subpart_division_random(&mut sim, &g, &p, &leaders(&p), dt, seed).unwrap();
            d.validate(&g, &p).unwrap();
        }
    }
}
