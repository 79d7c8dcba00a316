use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::graph::{GraphError, NetworkGraph, Partition};
use crate::sim::NodeId;
use crate::treecast::Forest;

/// Split of every part into sub-parts, each with a spanning tree rooted at
/// its representative. The sub-part id is the representative's node id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubPartDivision {
    forest: Forest,
}

impl SubPartDivision {
    pub fn from_forest(forest: Forest) -> Self {
        SubPartDivision { forest }
    }

    pub fn from_parents(parent: Vec<Option<NodeId>>) -> Self {
        Self::from_forest(Forest::from_parents(parent))
    }

    /// Every node its own sub-part.
    pub fn singletons(n: usize) -> Self {
        Self::from_forest(Forest::singletons(n))
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn n(&self) -> usize {
        self.forest.n()
    }

    /// r(v).
    pub fn rep(&self, v: NodeId) -> NodeId {
        self.forest.root_of(v)
    }

    pub fn is_rep(&self, v: NodeId) -> bool {
        self.forest.parent(v).is_none()
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.forest.parent(v)
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        self.forest.children(v)
    }

    /// R_i, sorted.
    pub fn reps_of_part(&self, partition: &Partition, part: usize) -> Vec<NodeId> {
        partition
            .members(part)
            .iter()
            .copied()
            .filter(|&v| self.is_rep(v))
            .collect()
    }

    /// k_i.
    pub fn count(&self, partition: &Partition, part: usize) -> usize {
        self.reps_of_part(partition, part).len()
    }

    pub fn total_reps(&self) -> usize {
        (0..self.n()).filter(|&v| self.is_rep(v)).count()
    }

    /// Diameter of each sub-part tree, keyed by representative.
    pub fn diameters(&self) -> BTreeMap<NodeId, usize> {
        self.forest.diameters()
    }

    /// Tree edges are graph edges inside one part.
    pub fn validate(&self, g: &NetworkGraph, partition: &Partition) -> Result<(), GraphError> {
        if self.n() != g.n() {
            return Err(GraphError::PartitionSize(self.n(), g.n()));
        }
        for v in 0..self.n() {
            if let Some(p) = self.parent(v) {
                if !g.has_edge(v, p) || partition.part_of(v) != partition.part_of(p) {
                    return Err(GraphError::InvalidTree(format!(
                        "sub-part edge {v}-{p} is not an intra-part graph edge"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `v subpart_id representative_id parent_or_-1` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in 0..self.n() {
            let p = self.parent(v).map_or(-1, |p| p as i64);
            writeln!(s, "{v} {} {} {p}", self.rep(v), self.rep(v)).unwrap();
        }
        s
    }

    pub fn from_text(text: &str, n: usize) -> Result<Self, GraphError> {
        let mut parent = vec![None; n];
        let mut rep = vec![usize::MAX; n];
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let t: Vec<i64> = line
                .split_whitespace()
                .map(|x| x.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| GraphError::Parse(ln + 1, "expected four integers".into()))?;
            if t.len() != 4 || t[0] < 0 || t[0] as usize >= n {
                return Err(GraphError::Parse(ln + 1, "expected `v subpart rep parent`".into()));
            }
            let v = t[0] as usize;
            rep[v] = t[2] as usize;
            parent[v] = (t[3] >= 0).then_some(t[3] as usize);
        }
        let out = Self::from_parents(parent);
        for (v, &r) in rep.iter().enumerate() {
            if out.rep(v) != r {
                return Err(GraphError::Parse(0, format!("node {v}: representative mismatch")));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let d = SubPartDivision::from_parents(vec![None, Some(0), Some(1), None, Some(3)]);
        let back = SubPartDivision::from_text(&d.to_text(), 5).unwrap();
        assert_eq!(back, d);
        assert_eq!(d.rep(2), 0);
        let g = NetworkGraph::path(5);
        let p = Partition::from_labels(&[0, 0, 0, 1, 1]);
        d.validate(&g, &p).unwrap();
        assert_eq!(d.count(&p, 1), 1);
        let bad = Partition::from_labels(&[0, 0, 1, 1, 1]);
        assert!(d.validate(&g, &bad).is_err());
    }
}
