//! Randomized shortcut construction by claiming tree edges.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;

use super::det::run_freezing;
use super::{ConstructError, Construction, Targets};
use crate::pa::Mode;
use crate::sim::{node_rng, Ctx, Multiplicity, NodeId, NodeProgram, Simulator, Status, Word};
use crate::subparts::ceil_log2;

/// Outer iterations: 4⌈log₂ N⌉ (at least one).
pub fn rand_iteration_cap(parts: usize) -> usize {
    (4 * ceil_log2(parts)).max(1)
}

struct Claim {
    parent: Option<NodeId>,
    limit: usize,
    own: Option<(Word, usize)>,
    seen: BTreeSet<Word>,
    queue: VecDeque<Word>,
    discarded: bool,
}

impl Claim {
    fn offer(&mut self, id: Word) {
        if self.seen.insert(id) {
            if self.seen.len() >= self.limit {
                self.discarded = true;
                self.queue.clear();
            } else if !self.discarded {
                self.queue.push_back(id);
            }
        }
    }
}

impl NodeProgram for Claim {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        for e in ctx.inbox {
            self.offer(e.payload[0]);
        }
        if let Some((id, delay)) = self.own {
            if ctx.round == delay {
                self.own = None;
                self.offer(id);
            } else {
                return Status::WakeAt(delay);
            }
        }
        if let (Some(p), Some(id)) = (self.parent, self.queue.pop_front()) {
            ctx.send_words(p, &[id]);
        }
        if self.parent.is_some() && !self.queue.is_empty() {
            Status::Running
        } else {
            Status::Idle
        }
    }
}

/// One claiming pass: representatives of active parts inject their part id
/// after a uniform delay in [0, c); ids climb T, each edge passing on the
/// first 2c−1 distinct ids and dropping out once it sees 2c.
pub(crate) fn claim_up_tree(
    sim: &mut Simulator<'_>,
    t: &Targets<'_>,
    active: &BTreeSet<usize>,
    iteration: usize,
) -> Result<BTreeMap<usize, BTreeSet<NodeId>>, ConstructError> {
    let n = t.tree.n();
    let c = t.c.max(1);
    let stream = t.seed ^ (iteration as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut progs: Vec<Claim> = (0..n)
        .map(|v| {
            let part = t.partition.part_of(v);
            let own = (t.division.is_rep(v) && active.contains(&part))
                .then(|| (part as Word, node_rng(stream, v).gen_range(0..c)));
            Claim {
                parent: t.tree.parent(v),
                limit: 2 * c,
                own,
                seen: BTreeSet::new(),
                queue: VecDeque::new(),
                discarded: false,
            }
        })
        .collect();
    let limit = 4 * (t.tree.height() + 2 * c + n) + 8;
    sim.with_phase("claim", |s| s.run(&mut progs, limit, &Multiplicity::Unit))?;
    let mut claimed: BTreeMap<usize, BTreeSet<NodeId>> = BTreeMap::new();
    for (v, p) in progs.iter().enumerate() {
        if p.parent.is_some() && !p.discarded {
            for &id in &p.seen {
                claimed.entry(id as usize).or_default().insert(v);
            }
        }
    }
    Ok(claimed)
}

pub fn randomized_shortcut(sim: &mut Simulator<'_>, t: &Targets<'_>) -> Result<Construction, ConstructError> {
    let cap = rand_iteration_cap(t.partition.num_parts());
    run_freezing(sim, t, cap, Mode::Rand, |s, active, j| claim_up_tree(s, t, active, j))
}
