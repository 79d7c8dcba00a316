//! Cole-Vishkin 3-colouring of an oriented pseudo-forest (out-degree ≤ 1).
//!
//! The colouring logic is independent of transport: callers supply a
//! `fetch` that returns each vertex's successor colour, costing one
//! communication step.

use thiserror::Error;

use crate::graph::NetworkGraph;
use crate::sim::{Ctx, Multiplicity, NodeId, NodeProgram, SimError, Simulator, Status, Word};

/// Colour-reduction iterations taking 64-bit ids down to {0..5}.
pub const REDUCTION_ROUNDS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CvError {
    #[error("vertex {0} has an out-edge that is not a graph edge")]
    OutDegreeViolation(NodeId),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CvStats {
    pub reduction_rounds: usize,
    pub total_rounds: usize,
}

/// One reduction step: index of the lowest bit where `own` and the
/// successor's colour differ, doubled, plus own bit there. Roots use index 0.
pub fn reduce(own: Word, succ: Option<Word>) -> Word {
    let i = match succ {
        Some(s) => (own ^ s).trailing_zeros() as Word,
        None => 0,
    };
    2 * i + ((own >> i) & 1)
}

fn smallest_free(used: &[Word]) -> Word {
    (0..3).find(|c| !used.contains(c)).expect("at most two neighbours constrain")
}

/// Runs the colouring. `succ[v]` is v's successor; `ids` must be distinct.
/// `fetch(colours)` returns each vertex's successor colour (None for roots).
pub fn colour<E>(
    succ: &[Option<usize>],
    ids: &[Word],
    mut fetch: impl FnMut(&[Word]) -> Result<Vec<Option<Word>>, E>,
) -> Result<(Vec<u8>, CvStats), E> {
    let n = succ.len();
    let mut col: Vec<Word> = ids.to_vec();
    let mut stats = CvStats::default();
    for _ in 0..REDUCTION_ROUNDS {
        let s = fetch(&col)?;
        col = (0..n).map(|v| reduce(col[v], s[v])).collect();
        stats.reduction_rounds += 1;
        stats.total_rounds += 1;
    }
    for c in [5, 4, 3] {
        // Shift down: take the successor's colour; roots pick a fresh one.
        let s = fetch(&col)?;
        let old = col.clone();
        col = (0..n)
            .map(|v| match s[v] {
                Some(x) => x,
                None => smallest_free(&[old[v]]),
            })
            .collect();
        // Predecessors now all carry v's old colour.
        let s = fetch(&col)?;
        col = (0..n)
            .map(|v| {
                if col[v] == c {
                    let mut used = vec![old[v]];
                    used.extend(s[v]);
                    smallest_free(&used)
                } else {
                    col[v]
                }
            })
            .collect();
        stats.total_rounds += 2;
    }
    Ok((col.into_iter().map(|c| c as u8).collect(), stats))
}

struct Echo {
    succ: Option<NodeId>,
    preds: Vec<NodeId>,
    colour: Word,
    heard: Option<Word>,
}

impl NodeProgram for Echo {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Status {
        if ctx.round == 0 {
            for &p in &self.preds {
                ctx.send_words(p, &[self.colour]);
            }
        }
        for e in ctx.inbox {
            if Some(e.src) == self.succ {
                self.heard = Some(e.payload[0]);
            }
        }
        Status::Idle
    }
}

/// Colours the orientation given by `succ` on the graph's own nodes, with
/// node ids as initial colours; each fetch is one round in which every
/// vertex sends its colour to its predecessors.
pub fn cole_vishkin_3color(
    sim: &mut Simulator<'_>,
    g: &NetworkGraph,
    succ: &[Option<NodeId>],
) -> Result<(Vec<u8>, CvStats), CvError> {
    let n = g.n();
    let mut preds = vec![Vec::new(); n];
    for (v, s) in succ.iter().enumerate() {
        if let Some(s) = *s {
            if !g.has_edge(v, s) {
                return Err(CvError::OutDegreeViolation(v));
            }
            preds[s].push(v);
        }
    }
    let ids: Vec<Word> = (0..n as Word).collect();
    colour(succ, &ids, |col| {
        let mut progs: Vec<Echo> = (0..n)
            .map(|v| Echo {
                succ: succ[v],
                preds: preds[v].clone(),
                colour: col[v],
                heard: None,
            })
            .collect();
        sim.run(&mut progs, 4, &Multiplicity::Unit)?;
        Ok::<_, CvError>(progs.into_iter().map(|p| p.heard).collect())
    })
}

/// Proper colouring check over out-edges, at most three colours.
pub fn is_proper(succ: &[Option<usize>], colours: &[u8]) -> bool {
    succ.iter()
        .enumerate()
        .all(|(v, s)| colours[v] < 3 && s.is_none_or(|s| colours[s] != colours[v]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn local(succ: &[Option<usize>], ids: &[Word]) -> (Vec<u8>, CvStats) {
        colour(succ, ids, |c| {
            Ok::<_, ()>(succ.iter().map(|s| s.map(|s| c[s])).collect())
        })
        .unwrap()
    }

    #[test]
    fn single_and_two_cycle() {
        let (c, _) = local(&[None], &[7]);
        assert!(c[0] < 3);
        let succ = [Some(1), Some(0)];
        let (c, _) = local(&succ, &[5, 9]);
        assert_ne!(c[0], c[1]);
        assert!(is_proper(&succ, &c));
    }

    #[test]
    fn random_rings_and_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 5, 64, 500] {
            let mut ids: Vec<Word> = (0..n).map(|_| rng.gen()).collect();
            ids.sort_unstable();
            ids.dedup();
            ids.shuffle(&mut rng);
            let n = ids.len();
            let ring: Vec<Option<usize>> = (0..n).map(|v| Some((v + 1) % n)).collect();
            let (c, st) = local(&ring, &ids);
            assert!(is_proper(&ring, &c));
            assert!(st.reduction_rounds <= 5 + 6);
            let path: Vec<Option<usize>> = (0..n).map(|v| (v + 1 < n).then_some(v + 1)).collect();
            let (c, _) = local(&path, &ids);
            assert!(is_proper(&path, &c));
        }
    }

    #[test]
    fn simulated_ring() {
        let n = 64;
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (v - 1, v)).collect();
        edges.push((0, n - 1));
        let g = NetworkGraph::new(n, edges).unwrap();
        let succ: Vec<Option<usize>> = (0..n).map(|v| Some((v + 1) % n)).collect();
        let mut sim = Simulator::new(&g);
        let (c, st) = cole_vishkin_3color(&mut sim, &g, &succ).unwrap();
        assert!(is_proper(&succ, &c));
        let r = sim.report();
        assert_eq!(r.rounds, st.total_rounds as u64);
        assert!(r.messages <= 2 * (n * st.total_rounds) as u64);
    }
}
