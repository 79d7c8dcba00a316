//! Doubling shortcut construction on directed paths.

use std::collections::{BTreeSet, VecDeque};

use crate::sim::{Ctx, Multiplicity, NodeId, NodeProgram, SimError, Simulator, Status, Word};
use crate::subparts::ceil_log2;

const STREAM: Word = 0;
const FORWARD: Word = 1;

/// One path: nodes from source (height 1) to sink, with initial sets.
#[derive(Clone, Debug)]
pub struct PathJob {
    pub nodes: Vec<NodeId>,
    pub sets: Vec<BTreeSet<u64>>,
    /// Where the sink passes its surviving set on, if anywhere.
    pub sink_parent: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathResult {
    pub final_sets: Vec<BTreeSet<u64>>,
    pub broken: Vec<bool>,
    pub carried: Vec<BTreeSet<u64>>,
    pub forwarded: BTreeSet<u64>,
}

/// Start round of every iteration; iteration i lasts (2c−1)+2^i rounds.
fn schedule(iterations: usize, c: usize) -> Vec<usize> {
    let mut t = vec![0];
    for i in 0..iterations {
        let last = *t.last().unwrap();
        t.push(last + (2 * c - 1) + (1 << i));
    }
    t
}

/// Round budget for one path of `len` nodes: Σ_i (2c + 2^i).
pub fn path_round_budget(len: usize, c: usize) -> usize {
    (0..ceil_log2(len)).map(|i| 2 * c + (1 << i)).sum()
}

struct PathNode<'a> {
    on_path: bool,
    height: usize,
    len: usize,
    iterations: usize,
    up: Option<NodeId>,
    sink_parent: Option<NodeId>,
    c: usize,
    starts: &'a [usize],
    set: BTreeSet<u64>,
    broken: bool,
    carried: BTreeSet<u64>,
    out: VecDeque<Word>,
    forward: VecDeque<Word>,
    received: Vec<u64>,
}

impl PathNode<'_> {
    fn window(&self, round: usize) -> usize {
        // Largest i with starts[i] < round.
        self.starts.iter().rposition(|&t| t < round).unwrap_or(0)
    }

    fn is_target(&self, i: usize) -> bool {
        self.height == self.len || self.height.trailing_zeros() as usize > i
    }

    fn next_wake(&self, round: usize) -> Status {
        if !self.on_path {
            return Status::Idle;
        }
        let tz = self.height.trailing_zeros() as usize;
        if tz < self.iterations && self.starts[tz] > round {
            return Status::WakeAt(self.starts[tz]);
        }
        let end = self.starts[self.starts.len() - 1];
        if self.height == self.len && self.sink_parent.is_some() && end > round {
            return Status::WakeAt(end);
        }
        Status::Idle
    }
}

impl NodeProgram for PathNode<'_> {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        let round = ctx.round;
        for e in ctx.inbox {
            let id = e.payload[1];
            if e.payload[0] == FORWARD {
                self.received.push(id);
                continue;
            }
            let i = self.window(round);
            if self.is_target(i) {
                self.set.insert(id);
            } else if !self.broken {
                self.carried.insert(id);
                self.out.push_back(id);
            }
        }
        if self.on_path {
            let tz = self.height.trailing_zeros() as usize;
            if tz < self.iterations && self.starts[tz] == round {
                if self.set.len() >= 2 * self.c {
                    self.broken = true;
                    self.set.clear();
                } else if self.height < self.len {
                    self.carried.extend(self.set.iter().copied());
                    self.out.extend(self.set.iter().copied());
                }
            }
            let end = self.starts[self.starts.len() - 1];
            if round == end
                && self.height == self.len
                && !self.broken
                && self.sink_parent.is_some()
                && self.set.len() < 2 * self.c
            {
                self.forward.extend(self.set.iter().copied());
            }
        }
        if let Some(id) = self.out.pop_front() {
            ctx.send_words(self.up.expect("only non-sinks stream"), &[STREAM, id]);
        }
        if let Some(id) = self.forward.pop_front() {
            ctx.send_words(self.sink_parent.unwrap(), &[FORWARD, id]);
        }
        if !self.out.is_empty() || !self.forward.is_empty() {
            Status::Running
        } else {
            self.next_wake(round)
        }
    }
}

/// Runs the doubling rule on disjoint paths at once. Returns one result per
/// job and, per node, the ids forwarded to it by sinks.
pub fn path_shortcut_multi(
    sim: &mut Simulator<'_>,
    jobs: &[PathJob],
    c: usize,
) -> Result<(Vec<PathResult>, Vec<Vec<u64>>), SimError> {
    let n = sim.graph().n();
    let c = c.max(1);
    let max_len = jobs.iter().map(|j| j.nodes.len()).max().unwrap_or(0);
    let starts = schedule(ceil_log2(max_len), c);
    let mut progs: Vec<PathNode> = (0..n)
        .map(|_| PathNode {
            on_path: false,
            height: 0,
            len: 0,
            iterations: 0,
            up: None,
            sink_parent: None,
            c,
            starts: &starts,
            set: BTreeSet::new(),
            broken: false,
            carried: BTreeSet::new(),
            out: VecDeque::new(),
            forward: VecDeque::new(),
            received: Vec::new(),
        })
        .collect();
    for job in jobs {
        let len = job.nodes.len();
        for (k, &v) in job.nodes.iter().enumerate() {
            let p = &mut progs[v];
            p.on_path = true;
            p.height = k + 1;
            p.len = len;
            p.iterations = ceil_log2(len);
            p.up = job.nodes.get(k + 1).copied();
            p.set = job.sets[k].clone();
            if k + 1 == len {
                p.sink_parent = job.sink_parent;
            }
        }
    }
    let limit = starts[starts.len() - 1] + 4 * c * (max_len + 1) + 2 * max_len + 4;
    sim.run(&mut progs, limit, &Multiplicity::Unit)?;
    let results = jobs
        .iter()
        .map(|job| {
            let sink = *job.nodes.last().unwrap();
            PathResult {
                final_sets: job.nodes.iter().map(|&v| progs[v].set.clone()).collect(),
                broken: job.nodes.iter().map(|&v| progs[v].broken).collect(),
                carried: job.nodes.iter().map(|&v| progs[v].carried.clone()).collect(),
                forwarded: if progs[sink].broken || progs[sink].set.len() >= 2 * c {
                    BTreeSet::new()
                } else {
                    progs[sink].set.clone()
                },
            }
        })
        .collect();
    let received = progs.into_iter().map(|p| p.received).collect();
    Ok((results, received))
}

/// Single-path entry point.
pub fn path_shortcut(
    sim: &mut Simulator<'_>,
    path: &[NodeId],
    sets: &[BTreeSet<u64>],
    c: usize,
) -> Result<PathResult, SimError> {
    let job = PathJob {
        nodes: path.to_vec(),
        sets: sets.to_vec(),
        sink_parent: None,
    };
    Ok(path_shortcut_multi(sim, &[job], c)?.0.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NetworkGraph;
    use crate::oracle::oracle_path_shortcut;

    fn set(xs: &[u64]) -> BTreeSet<u64> {
        xs.iter().copied().collect()
    }

    fn check(sets: Vec<BTreeSet<u64>>, c: usize) -> PathResult {
        let n = sets.len();
        let g = NetworkGraph::path(n);
        let path: Vec<NodeId> = (0..n).collect();
        let mut sim = Simulator::new(&g);
        let got = path_shortcut(&mut sim, &path, &sets, c).unwrap();
        let want = oracle_path_shortcut(&sets, c);
        assert_eq!(got.final_sets, want.final_sets);
        assert_eq!(got.broken, want.broken);
        assert_eq!(got.carried, want.carried);
        assert_eq!(got.forwarded, want.forwarded);
        assert!(sim.report().rounds as usize <= path_round_budget(n, c));
        got
    }

    #[test]
    fn four_nodes_one_part() {
        let r = check(vec![set(&[1]), set(&[]), set(&[]), set(&[])], 10);
        assert_eq!(r.final_sets[3], set(&[1]));
    }

    #[test]
    fn alternating_parts_eight() {
        let sets: Vec<_> = (0..8).map(|k| set(&[k % 2])).collect();
        let r = check(sets, 1);
        assert!(r.final_sets.iter().all(|s| s.len() <= 2 * 3));
    }

    #[test]
    fn dense_sets_break() {
        let sets: Vec<_> = (0..16u64).map(|k| set(&[k, k + 100])).collect();
        let r = check(sets, 1);
        assert!(r.broken.iter().any(|&b| b));
    }

    #[test]
    fn random_paths_match_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..150 {
            let n = rng.gen_range(1..=70);
            let c = rng.gen_range(1..=3);
            let sets: Vec<_> = (0..n)
                .map(|_| (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..12u64)).collect())
                .collect();
            check(sets, c);
        }
    }
}
