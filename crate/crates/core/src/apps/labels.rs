use super::AppError;
use crate::agg::AggOp;
use crate::graph::Partition;
use crate::pa::{pa_pipeline, Mode};
use crate::sim::{NodeId, Simulator, Word};

/// Parts of the instance: connected components of H, where `in_h[e]` marks
/// edge `e` of the communication graph. Each node knows which incident
/// edges are marked, so this is input plumbing, not computation.
pub fn h_components(n: usize, edges: &[(NodeId, NodeId)], in_h: &[bool]) -> Partition {
    let mut parent: Vec<NodeId> = (0..n).collect();
    fn find(parent: &mut [NodeId], mut v: NodeId) -> NodeId {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (e, &(u, v)) in edges.iter().enumerate() {
        if in_h[e] {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            parent[a.max(b)] = a.min(b);
        }
    }
    let labels: Vec<u64> = (0..n).map(|v| find(&mut parent, v) as u64).collect();
    Partition::from_labels(&labels)
}

/// Labels every node with the smallest id in its H-component, computed by
/// one PA with `min` over node ids.
pub fn component_labels(sim: &mut Simulator<'_>, in_h: &[bool], mode: Mode, seed: u64) -> Result<Vec<NodeId>, AppError> {
    let g = sim.graph();
    let partition = h_components(g.n(), g.edges(), in_h);
    let ids: Vec<Word> = (0..g.n()).map(|v| v as Word).collect();
    let out = pa_pipeline(sim, &partition, &ids, AggOp::Min, mode, seed)?;
    Ok(out.values.into_iter().map(|x| x as NodeId).collect())
}
