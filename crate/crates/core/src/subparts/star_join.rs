//! Star joinings over clusters (node clusters, sub-parts or parts).
//!
//! Every cluster may choose one exiting edge `(u, w)` with `u` inside it.
//! Clusters learn about their targets only through messages across chosen
//! edges and cluster-wide aggregation.

use std::collections::BTreeMap;

use rand::Rng;

use super::cole_vishkin;
use crate::agg::{AggOp, Item};
use crate::sim::{exchange, node_rng, NodeId, Payload, SimError, Simulator, Word};
use crate::treecast::{all_reduce, Forest};

/// Aggregation inside clusters: every node learns the fold of its
/// cluster's values.
pub trait ClusterComm {
    fn n(&self) -> usize;
    /// Cluster key of `v` (the leader / representative id).
    fn cluster_of(&self, v: NodeId) -> NodeId;
    fn all_reduce(
        &mut self,
        sim: &mut Simulator<'_>,
        values: &[Item],
        op: AggOp,
    ) -> Result<Vec<Item>, SimError>;
}

/// Aggregation along the clusters' own spanning trees.
pub struct ForestComm<'a>(pub &'a Forest);

impl ClusterComm for ForestComm<'_> {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn cluster_of(&self, v: NodeId) -> NodeId {
        self.0.root_of(v)
    }

    fn all_reduce(
        &mut self,
        sim: &mut Simulator<'_>,
        values: &[Item],
        op: AggOp,
    ) -> Result<Vec<Item>, SimError> {
        all_reduce(sim, self.0, values, op)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Designation {
    Receiver,
    Joiner,
    Untouched,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StarJoining {
    pub designation: BTreeMap<NodeId, Designation>,
    /// Chosen edge of every joiner, landing in a receiver.
    pub joins: BTreeMap<NodeId, (NodeId, NodeId)>,
}

impl StarJoining {
    pub fn joiners(&self) -> usize {
        self.joins.len()
    }

    pub fn receivers(&self) -> usize {
        self.designation
            .values()
            .filter(|&&d| d == Designation::Receiver)
            .count()
    }

    /// Joiners over the clusters that chose an edge.
    pub fn merged_fraction(&self, participating: usize) -> f64 {
        if participating == 0 {
            0.0
        } else {
            self.joiners() as f64 / participating as f64
        }
    }

    /// No cluster both joins and receives; every joiner edge ends in a
    /// receiver.
    pub fn is_valid(&self, cluster_of: impl Fn(NodeId) -> NodeId) -> bool {
        self.joins.iter().all(|(&c, &(u, w))| {
            cluster_of(u) == c
                && self.designation[&c] == Designation::Joiner
                && self.designation.get(&cluster_of(w)) == Some(&Designation::Receiver)
        })
    }
}

/// Shared plumbing: ask across chosen edges, then spread the answer inside
/// the asking cluster.
struct Ask<'c, C: ClusterComm> {
    comm: &'c mut C,
    edges: &'c BTreeMap<NodeId, (NodeId, NodeId)>,
}

impl<C: ClusterComm> Ask<'_, C> {
    /// Each asking cluster's `u` queries `w`, which answers `answer(w)`.
    /// Returns the answer per asking cluster once every member knows it.
    fn ask(
        &mut self,
        sim: &mut Simulator<'_>,
        askers: &[NodeId],
        answer: impl Fn(NodeId) -> Word,
    ) -> Result<BTreeMap<NodeId, Word>, SimError> {
        let n = self.comm.n();
        let sends = askers
            .iter()
            .map(|c| {
                let (u, w) = self.edges[c];
                (u, w, Payload::from_slice(&[1]))
            })
            .collect();
        let inbox = exchange(sim, sends)?;
        let mut replies = Vec::new();
        for (w, msgs) in inbox.iter().enumerate() {
            for e in msgs {
                replies.push((w, e.src, Payload::from_slice(&[answer(w)])));
            }
        }
        let back = exchange(sim, replies)?;
        // Offset by one so that the identity 0 means "no answer here".
        let mut vals = vec![AggOp::Max.identity(); n];
        for c in askers {
            let (u, w) = self.edges[c];
            if let Some(e) = back[u].iter().find(|e| e.src == w) {
                vals[u] = AggOp::Max.lift(u, e.payload[0] + 1);
            }
        }
        let spread = self.comm.all_reduce(sim, &vals, AggOp::Max)?;
        Ok(askers
            .iter()
            .map(|&c| (c, spread[self.edges[&c].0].word - 1))
            .collect())
    }

    /// Each sender notifies the far end of its chosen edge; every node learns
    /// how many notifications its cluster received.
    fn notify(&mut self, sim: &mut Simulator<'_>, senders: &[NodeId]) -> Result<Vec<Word>, SimError> {
        let n = self.comm.n();
        let sends = senders
            .iter()
            .map(|c| {
                let (u, w) = self.edges[c];
                (u, w, Payload::from_slice(&[1]))
            })
            .collect();
        let inbox = exchange(sim, sends)?;
        let vals: Vec<Item> = (0..n)
            .map(|v| AggOp::Sum.lift(v, inbox[v].len() as Word))
            .collect();
        Ok(self
            .comm
            .all_reduce(sim, &vals, AggOp::Sum)?
            .into_iter()
            .map(|x| x.word)
            .collect())
    }
}

const UNASSIGNED: Word = 0;
const RECEIVER: Word = 1;
const JOINER: Word = 2;

fn status_word(d: Option<&Designation>) -> Word {
    match d {
        None => UNASSIGNED,
        Some(Designation::Receiver) => RECEIVER,
        Some(_) => JOINER,
    }
}

/// Deterministic star joining. `clusters` lists every cluster key; `edges`
/// holds the chosen edge of each cluster that has one. Clusters without an
/// edge are sinks: they receive if pointed at and never join. At least a
/// third of the edge-choosing clusters join.
pub fn star_joining_det<C: ClusterComm>(
    sim: &mut Simulator<'_>,
    comm: &mut C,
    clusters: &[NodeId],
    edges: &BTreeMap<NodeId, (NodeId, NodeId)>,
) -> Result<StarJoining, SimError> {
    let owner: Vec<NodeId> = (0..comm.n()).map(|v| comm.cluster_of(v)).collect();
    let choosers: Vec<NodeId> = clusters.iter().copied().filter(|c| edges.contains_key(c)).collect();
    let mut ask = Ask { comm, edges };
    let mut des: BTreeMap<NodeId, Designation> = BTreeMap::new();
    let mut joins = BTreeMap::new();

    // Stage 1: in-degree ≥ 2 (or any in-edge at a sink) makes a receiver;
    // clusters pointing at a receiver join it.
    let indeg = ask.notify(sim, &choosers)?;
    for &c in clusters {
        let sink = !edges.contains_key(&c);
        if indeg[c] >= 2 || (sink && indeg[c] >= 1) {
            des.insert(c, Designation::Receiver);
        }
    }
    let open: Vec<NodeId> = choosers.iter().copied().filter(|c| !des.contains_key(c)).collect();
    let snap = des.clone();
    let target = ask.ask(sim, &open, |w| status_word(snap.get(&owner[w])))?;
    for &c in &open {
        if target[&c] == RECEIVER {
            des.insert(c, Designation::Joiner);
            joins.insert(c, edges[&c]);
        }
    }

    // Stage 2: what is left forms paths and cycles.
    let rest: Vec<NodeId> = open.iter().copied().filter(|c| !des.contains_key(c)).collect();
    let snap = des.clone();
    let target = ask.ask(sim, &rest, |w| status_word(snap.get(&owner[w])))?;
    let index: BTreeMap<NodeId, usize> = rest.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let succ: Vec<Option<usize>> = rest
        .iter()
        .map(|c| {
            (target[c] == UNASSIGNED).then(|| index[&owner[edges[c].1]])
        })
        .collect();
    let with_succ: Vec<NodeId> = rest.iter().copied().filter(|c| target[c] == UNASSIGNED).collect();
    let ids: Vec<Word> = rest.iter().map(|&c| c as Word).collect();
    let (colours, _) = cole_vishkin::colour(&succ, &ids, |col| {
        let by_cluster: BTreeMap<NodeId, Word> =
            rest.iter().zip(col).map(|(&c, &x)| (c, x)).collect();
        let got = ask.ask(sim, &with_succ, |w| by_cluster.get(&owner[w]).copied().unwrap_or(0))?;
        Ok::<_, SimError>(rest.iter().map(|c| got.get(c).copied()).collect())
    })?;
    for k in 0..3u8 {
        let cand: Vec<NodeId> = rest
            .iter()
            .enumerate()
            .filter(|&(i, c)| colours[i] == k && !des.contains_key(c))
            .map(|(_, &c)| c)
            .collect();
        let snap = des.clone();
        let target = ask.ask(sim, &cand, |w| status_word(snap.get(&owner[w])))?;
        let going: Vec<NodeId> = cand
            .iter()
            .copied()
            .filter(|c| target[c] != JOINER)
            .collect();
        let heard = ask.notify(sim, &going)?;
        for &c in &going {
            des.insert(c, Designation::Joiner);
            joins.insert(c, edges[&c]);
            let t = owner[edges[&c].1];
            debug_assert!(heard[t] > 0);
            des.insert(t, Designation::Receiver);
        }
    }
    for &c in clusters {
        des.entry(c).or_insert(Designation::Untouched);
    }
    Ok(StarJoining {
        designation: des,
        joins,
    })
}

/// Randomised star joining: each leader flips a fair coin; heads receive,
/// tails whose chosen edge lands in a heads cluster join.
pub fn star_joining_random<C: ClusterComm>(
    sim: &mut Simulator<'_>,
    comm: &mut C,
    clusters: &[NodeId],
    edges: &BTreeMap<NodeId, (NodeId, NodeId)>,
    seed: u64,
) -> Result<StarJoining, SimError> {
    let n = comm.n();
    let mut vals = vec![AggOp::Max.identity(); n];
    for &c in clusters {
        let heads = node_rng(seed, c).gen_bool(0.5);
        vals[c] = AggOp::Max.lift(c, 1 + Word::from(heads));
    }
    let coin = comm.all_reduce(sim, &vals, AggOp::Max)?;
    let heads = |v: NodeId| coin[v].word == 2;
    let tails: Vec<NodeId> = clusters
        .iter()
        .copied()
        .filter(|&c| !heads(c) && edges.contains_key(&c))
        .collect();
    let mut ask = Ask { comm, edges };
    let target = ask.ask(sim, &tails, |w| Word::from(heads(w)))?;
    let mut des = BTreeMap::new();
    let mut joins = BTreeMap::new();
    for &c in clusters {
        let d = if heads(c) {
            Designation::Receiver
        } else if target.get(&c) == Some(&1) {
            joins.insert(c, edges[&c]);
            Designation::Joiner
        } else {
            Designation::Untouched
        };
        des.insert(c, d);
    }
    Ok(StarJoining {
        designation: des,
        joins,
    })
}
