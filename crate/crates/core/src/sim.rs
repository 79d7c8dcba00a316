//! Synchronous CONGEST round simulator.
//!
//! Every node runs a [`NodeProgram`]. Envelopes emitted in round `r` are
//! delivered at the start of round `r + 1`, inboxes sorted by source id.
//! Round 0 is local initialisation; the reported round count is the number
//! of communication rounds, expanded by the multiplicity schedule when
//! meta-rounds are in use.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::graph::NetworkGraph;

pub type NodeId = usize;
pub type Word = u64;
pub type Payload = SmallVec<[Word; 4]>;

/// Payload budget standing in for an O(log n)-bit message.
pub const DEFAULT_PAYLOAD_WORDS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub src: NodeId,
    pub dst: NodeId,
    pub payload: Payload,
    /// Round in which the envelope was emitted.
    pub round: usize,
}

/// What a program wants after a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Step again next round.
    Running,
    /// Step only when an envelope arrives.
    Idle,
    /// Step at the given round, or earlier if an envelope arrives.
    WakeAt(usize),
}

pub trait NodeProgram {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status;
}

/// Per-step view handed to a program.
pub struct Ctx<'a> {
    pub node: NodeId,
    pub round: usize,
    pub inbox: &'a [Envelope],
    pub neighbors: &'a [NodeId],
    outbox: &'a mut Vec<(NodeId, Payload)>,
}

impl Ctx<'_> {
    pub fn send(&mut self, dst: NodeId, payload: Payload) {
        self.outbox.push((dst, payload));
    }

    pub fn send_words(&mut self, dst: NodeId, words: &[Word]) {
        self.outbox.push((dst, Payload::from_slice(words)));
    }
}

/// Per-round edge capacity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Multiplicity {
    #[default]
    Unit,
    /// Every round is a meta-round of the given factor: that many envelopes
    /// per directed edge, accounted as that many physical rounds.
    Meta(usize),
    /// Explicit factors per round; unlisted rounds have factor 1.
    Schedule(BTreeMap<usize, usize>),
}

impl Multiplicity {
    pub fn at(&self, round: usize) -> usize {
        match self {
            Multiplicity::Unit => 1,
            Multiplicity::Meta(k) => (*k).max(1),
            Multiplicity::Schedule(m) => m.get(&round).copied().unwrap_or(1).max(1),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimReport {
    pub rounds: u64,
    pub messages: u64,
    pub messages_by_phase: BTreeMap<String, u64>,
    pub max_edge_load: usize,
    pub halted: bool,
}

impl SimReport {
    /// Folds another report into this one, as if run afterwards.
    pub fn absorb(&mut self, other: &SimReport) {
        self.rounds += other.rounds;
        self.messages += other.messages;
        for (k, v) in &other.messages_by_phase {
            *self.messages_by_phase.entry(k.clone()).or_default() += v;
        }
        self.max_edge_load = self.max_edge_load.max(other.max_edge_load);
        self.halted = other.halted;
    }

    pub fn phase(&self, label: &str) -> u64 {
        self.messages_by_phase.get(label).copied().unwrap_or(0)
    }
}

/// Statistics of a single `run` call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub rounds: u64,
    pub logical_rounds: usize,
    pub messages: u64,
    pub max_edge_load: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("node {src} sent {load} envelopes to {dst} in round {round}, capacity {capacity}")]
    CapacityExceeded {
        round: usize,
        src: NodeId,
        dst: NodeId,
        load: usize,
        capacity: usize,
    },
    #[error("node {src} sent to non-neighbour {dst}")]
    NonAdjacentSend { src: NodeId, dst: NodeId },
    #[error("node {src} sent a payload of {words} words, limit {limit}")]
    PayloadTooLarge {
        src: NodeId,
        words: usize,
        limit: usize,
    },
    #[error("round limit {limit} reached before all programs went idle")]
    RoundLimitExceeded { limit: usize, partial: SimReport },
    #[error("expected {expected} programs, got {got}")]
    ProgramCount { expected: usize, got: usize },
}

/// Deterministic per-node generator derived from a run seed.
pub fn node_rng(seed: u64, node: NodeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(node as u64 + 1);
    rng
}

/// Drives node programs over a fixed graph and accumulates a [`SimReport`]
/// across successive runs.
pub struct Simulator<'g> {
    graph: &'g NetworkGraph,
    payload_words: usize,
    report: SimReport,
    phases: Vec<String>,
}

impl<'g> Simulator<'g> {
    pub fn new(graph: &'g NetworkGraph) -> Self {
        Self::with_payload_words(graph, DEFAULT_PAYLOAD_WORDS)
    }

    pub fn with_payload_words(graph: &'g NetworkGraph, payload_words: usize) -> Self {
        Simulator {
            graph,
            payload_words,
            report: SimReport {
                halted: true,
                ..SimReport::default()
            },
            phases: Vec::new(),
        }
    }

    pub fn graph(&self) -> &'g NetworkGraph {
        self.graph
    }

    pub fn report(&self) -> &SimReport {
        &self.report
    }

    pub fn into_report(self) -> SimReport {
        self.report
    }

    /// Attributes messages sent inside `f` to `label` (innermost label wins).
    pub fn with_phase<R>(&mut self, label: &str, f: impl FnOnce(&mut Self) -> R) -> R {
        self.phases.push(label.to_string());
        let out = f(self);
        self.phases.pop();
        out
    }

    pub fn current_phase(&self) -> Option<&str> {
        self.phases.last().map(String::as_str)
    }

    /// Runs until every program is idle with nothing in flight, or the
    /// logical round limit is hit. Programs keep their (partial) state on
    /// error.
    pub fn run<P: NodeProgram>(
        &mut self,
        programs: &mut [P],
        round_limit: usize,
        multiplicity: &Multiplicity,
    ) -> Result<RunStats, SimError> {
        let n = self.graph.n();
        if programs.len() != n {
            return Err(SimError::ProgramCount {
                expected: n,
                got: programs.len(),
            });
        }
        let mut stats = RunStats::default();
        let mut running: BTreeSet<NodeId> = (0..n).collect();
        let mut timers: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
        let mut wake_round: Vec<Option<usize>> = vec![None; n];
        let mut inboxes: Vec<Vec<Envelope>> = vec![Vec::new(); n];
        let mut in_flight: Vec<Envelope> = Vec::new();
        let mut outbox: Vec<(NodeId, Payload)> = Vec::new();
        let mut round = 0usize;

        loop {
            // Deliver.
            let mut receivers: BTreeSet<NodeId> = BTreeSet::new();
            for env in in_flight.drain(..) {
                receivers.insert(env.dst);
                inboxes[env.dst].push(env);
            }
            let mut to_step: BTreeSet<NodeId> = running.clone();
            to_step.extend(receivers.iter().copied());
            if let Some(due) = timers.remove(&round) {
                for v in due {
                    if wake_round[v] == Some(round) {
                        to_step.insert(v);
                    }
                }
            }
            if to_step.is_empty() {
                let pending = timers
                    .iter()
                    .any(|(&r, vs)| vs.iter().any(|&v| wake_round[v] == Some(r)));
                if !pending {
                    break;
                }
            }
            if round > round_limit {
                let mut partial = self.report.clone();
                self.account(&stats, &mut partial, false);
                return Err(SimError::RoundLimitExceeded {
                    limit: round_limit,
                    partial,
                });
            }
            if round > 0 {
                stats.rounds += multiplicity.at(round - 1) as u64;
                stats.logical_rounds = round;
            }
            let capacity = multiplicity.at(round);
            let mut emitted: Vec<Envelope> = Vec::new();
            for v in to_step {
                let inbox = std::mem::take(&mut inboxes[v]);
                let mut inbox = inbox;
                inbox.sort_by_key(|e| e.src);
                outbox.clear();
                let status = {
                    let mut ctx = Ctx {
                        node: v,
                        round,
                        inbox: &inbox,
                        neighbors: self.graph.neighbors(v),
                        outbox: &mut outbox,
                    };
                    programs[v].step(&mut ctx)
                };
                inbox.clear();
                inboxes[v] = inbox;
                // Validate and count this node's sends.
                let mut per_dst: BTreeMap<NodeId, usize> = BTreeMap::new();
                for (dst, payload) in outbox.drain(..) {
                    if !self.graph.has_edge(v, dst) {
                        return Err(SimError::NonAdjacentSend { src: v, dst });
                    }
                    if payload.len() > self.payload_words {
                        return Err(SimError::PayloadTooLarge {
                            src: v,
                            words: payload.len(),
                            limit: self.payload_words,
                        });
                    }
                    let load = per_dst.entry(dst).or_default();
                    *load += 1;
                    if *load > capacity {
                        return Err(SimError::CapacityExceeded {
                            round,
                            src: v,
                            dst,
                            load: *load,
                            capacity,
                        });
                    }
                    stats.max_edge_load = stats.max_edge_load.max(*load);
                    emitted.push(Envelope {
                        src: v,
                        dst,
                        payload,
                        round,
                    });
                }
                match status {
                    Status::Running => {
                        running.insert(v);
                        wake_round[v] = None;
                    }
                    Status::Idle => {
                        running.remove(&v);
                        wake_round[v] = None;
                    }
                    Status::WakeAt(r) => {
                        running.remove(&v);
                        if r > round {
                            wake_round[v] = Some(r);
                            timers.entry(r).or_default().push(v);
                        } else {
                            running.insert(v);
                            wake_round[v] = None;
                        }
                    }
                }
            }
            stats.messages += emitted.len() as u64;
            in_flight = emitted;
            round += 1;
        }

        let mut report = std::mem::take(&mut self.report);
        self.account(&stats, &mut report, true);
        self.report = report;
        Ok(stats)
    }

    fn account(&self, stats: &RunStats, report: &mut SimReport, halted: bool) {
        report.rounds += stats.rounds;
        report.messages += stats.messages;
        if let Some(label) = self.current_phase() {
            if stats.messages > 0 || !report.messages_by_phase.contains_key(label) {
                *report.messages_by_phase.entry(label.to_string()).or_default() +=
                    stats.messages;
            }
        }
        report.max_edge_load = report.max_edge_load.max(stats.max_edge_load);
        report.halted = halted;
    }

    /// Adds messages and rounds accounted outside `run`; used when a
    /// sub-protocol is charged in closed form.
    pub fn charge(&mut self, rounds: u64, messages: u64) {
        let stats = RunStats {
            rounds,
            logical_rounds: rounds as usize,
            messages,
            max_edge_load: 0,
        };
        let mut report = std::mem::take(&mut self.report);
        self.account(&stats, &mut report, true);
        self.report = report;
    }
}

/// Runs a one-shot exchange: every listed envelope is sent in round 0 and
/// the receivers' inboxes are returned (sorted by source).
pub fn exchange(
    sim: &mut Simulator<'_>,
    sends: Vec<(NodeId, NodeId, Payload)>,
) -> Result<Vec<Vec<Envelope>>, SimError> {
    let n = sim.graph().n();
    let mut per_node: Vec<Vec<(NodeId, Payload)>> = vec![Vec::new(); n];
    for (src, dst, p) in sends {
        per_node[src].push((dst, p));
    }
    let mut programs: Vec<OneShot> = per_node
        .into_iter()
        .map(|out| OneShot {
            out,
            inbox: Vec::new(),
        })
        .collect();
    sim.run(&mut programs, 2, &Multiplicity::Unit)?;
    Ok(programs.into_iter().map(|p| p.inbox).collect())
}

struct OneShot {
    out: Vec<(NodeId, Payload)>,
    inbox: Vec<Envelope>,
}

impl NodeProgram for OneShot {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        self.inbox.extend(ctx.inbox.iter().cloned());
        for (dst, p) in self.out.drain(..) {
            ctx.send(dst, p);
        }
        Status::Idle
    }
}
