use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pwagg::apps::{component_labels, mst};
use pwagg::graph::{gen_random_connected, gen_random_weighted, NetworkGraph};
use pwagg::oracle::{oracle_component_labels, oracle_mst};
use pwagg::pa::Mode;
use pwagg::sim::Simulator;
use pwagg::subparts::ceil_log2;

fn run_mst(g: &NetworkGraph, mode: Mode, seed: u64) -> pwagg::apps::MstOutcome {
    let mut sim = Simulator::new(g);
    let out = mst(&mut sim, mode, seed).unwrap();
    assert!(out.phases <= ceil_log2(g.n()), "{} phases", out.phases);
    assert!(out.fragments.windows(2).all(|w| w[1] < w[0]), "{:?}", out.fragments);
    out
}

#[test]
fn triangle_keeps_two_lightest() {
    let g = NetworkGraph::weighted(3, vec![(0, 1, 1), (1, 2, 2), (0, 2, 3)]).unwrap();
    let out = run_mst(&g, Mode::Det, 0);
    let mut expect = vec![g.edge_index(0, 1).unwrap(), g.edge_index(1, 2).unwrap()];
    expect.sort_unstable();
    assert_eq!(out.edges, expect);
}

#[test]
fn tree_input_is_its_own_mst() {
    let g = NetworkGraph::weighted(6, vec![(0, 1, 5), (1, 2, 1), (1, 3, 9), (3, 4, 2), (3, 5, 2)]).unwrap();
    for mode in [Mode::Det, Mode::Rand] {
        assert_eq!(run_mst(&g, mode, 1).edges, (0..5).collect::<Vec<_>>());
    }
}

#[test]
fn single_node_needs_no_phase() {
    let g = NetworkGraph::path(1);
    let out = run_mst(&g, Mode::Det, 0);
    assert_eq!((out.phases, out.edges.len()), (0, 0));
}

#[test]
fn random_weighted_matches_greedy_oracle() {
    for seed in 0..40u64 {
        let g = gen_random_weighted(150, 0.04, 1000, seed);
        let mode = if seed % 2 == 0 { Mode::Det } else { Mode::Rand };
        assert_eq!(run_mst(&g, mode, seed).edges, oracle_mst(&g), "seed {seed}");
    }
}

#[test]
fn labels_whole_graph_and_empty() {
    let g = gen_random_connected(50, 0.1, 2);
    let mut sim = Simulator::new(&g);
    assert_eq!(component_labels(&mut sim, &vec![true; g.m()], Mode::Det, 0).unwrap(), vec![0; 50]);
    let mut sim = Simulator::new(&g);
    assert_eq!(component_labels(&mut sim, &vec![false; g.m()], Mode::Rand, 0).unwrap(), (0..50).collect::<Vec<_>>());
}

#[test]
fn labels_match_union_find() {
    for seed in 0..6u64 {
        let g = gen_random_connected(200, 0.03, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let in_h: Vec<bool> = (0..g.m()).map(|_| rng.gen_bool(0.3)).collect();
        let h: Vec<_> = g.edges().iter().zip(&in_h).filter(|(_, &x)| x).map(|(&e, _)| e).collect();
        let expected = oracle_component_labels(200, &h);
        for mode in [Mode::Det, Mode::Rand] {
            let mut sim = Simulator::new(&g);
            assert_eq!(component_labels(&mut sim, &in_h, mode, seed).unwrap(), expected, "seed {seed} {mode}");
        }
    }
}
