use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pwagg::agg::AggOp;
use pwagg::graph::{bfs_tree_oracle, gen_grid_with_apex, gen_random_connected, gen_random_connected_partition, NetworkGraph, Partition};
use pwagg::oracle::oracle_pa_per_node;
use pwagg::pa::{coarsen, pa_pipeline, pa_solve_leaderless, LeaderlessSetup, Mode};
use pwagg::shortcuts::Shortcut;
use pwagg::sim::{Simulator, Word};
use pwagg::subparts::{ceil_log2, subpart_division_det, C_IT};

const K_TOT: f64 = 64.0;

fn random_values(n: usize, seed: u64) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..1_000_000)).collect()
}

fn leaderless(g: &NetworkGraph, p: &Partition, values: &[Word], op: AggOp) -> (Vec<Word>, usize) {
    let tree = bfs_tree_oracle(g, 0).unwrap();
    let mut sim = Simulator::new(g);
    let (div, _) = subpart_division_det(&mut sim, g, p, tree.height().max(1)).unwrap();
    let sc = Shortcut::whole_tree(&tree, p.num_parts());
    let setup = LeaderlessSetup { tree: &tree, partition: p, division: &div, shortcut: &sc, b: 1, mode: Mode::Det, seed: 0 };
    let out = pa_solve_leaderless(&mut sim, setup, values, op).unwrap();
    let iters = coarsen(&mut Simulator::new(g), p).unwrap().iterations;
    (out, iters)
}

#[test]
fn leaderless_singletons() {
    let g = gen_random_connected(30, 0.2, 1);
    let p = Partition::singletons(30);
    let values = random_values(30, 1);
    let (out, iters) = leaderless(&g, &p, &values, AggOp::Min);
    assert_eq!(out, values);
    assert_eq!(iters, 0);
}

#[test]
fn leaderless_path_min() {
    let g = NetworkGraph::path(32);
    let p = Partition::whole(32);
    let values = random_values(32, 2);
    let (out, iters) = leaderless(&g, &p, &values, AggOp::Min);
    assert_eq!(out, oracle_pa_per_node(&p, &values, AggOp::Min));
    assert!(iters <= C_IT * 5, "{iters}");
}

#[test]
fn leaderless_random_six_parts() {
    let g = gen_random_connected(200, 0.02, 3);
    let p = gen_random_connected_partition(&g, 6, 3).unwrap();
    let values = random_values(200, 3);
    for op in [AggOp::Sum, AggOp::Max, AggOp::FirstById] {
        let (out, _) = leaderless(&g, &p, &values, op);
        assert_eq!(out, oracle_pa_per_node(&p, &values, op));
    }
}

#[test]
fn coarsening_leader_lies_in_part() {
    let g = gen_random_connected(120, 0.04, 4);
    let p = gen_random_connected_partition(&g, 9, 4).unwrap();
    let c = coarsen(&mut Simulator::new(&g), &p).unwrap();
    for (i, &l) in c.leaders.iter().enumerate() {
        assert_eq!(p.part_of(l), i);
    }
    assert!(c.iterations <= C_IT * ceil_log2(120));
}

#[test]
fn pipeline_single_node() {
    let g = NetworkGraph::path(1);
    let p = Partition::whole(1);
    let mut sim = Simulator::new(&g);
    let out = pa_pipeline(&mut sim, &p, &[7], AggOp::Sum, Mode::Det, 0).unwrap();
    assert_eq!(out.values, vec![7]);
    assert_eq!(sim.report().messages, 0);
}

#[test]
fn pipeline_grid_sum_within_message_ceiling() {
    let gw = gen_grid_with_apex(32, 32);
    let g = &gw.graph;
    let values = random_values(g.n(), 5);
    let expected = oracle_pa_per_node(&gw.partition, &values, AggOp::Sum);
    for mode in [Mode::Det, Mode::Rand] {
        let mut sim = Simulator::new(g);
        let out = pa_pipeline(&mut sim, &gw.partition, &values, AggOp::Sum, mode, 5).unwrap();
        assert_eq!(out.values, expected, "{mode}");
        let ln = (g.n() as f64).ln();
        let ceiling = K_TOT * g.m() as f64 * ln.powi(3);
        let msgs = sim.report().messages as f64;
        assert!(msgs <= ceiling, "{mode}: {msgs} > {ceiling}");
    }
}

#[test]
fn pipeline_random_corpus() {
    let ops = [AggOp::Min, AggOp::Max, AggOp::Sum, AggOp::Or, AggOp::And, AggOp::FirstById];
    for seed in 0..50u64 {
        let n = 20 + (seed as usize * 7) % 100;
        let g = gen_random_connected(n, 4.0 / n as f64, seed);
        let p = gen_random_connected_partition(&g, 1 + (seed as usize % 12).min(n - 1), seed).unwrap();
        let values = random_values(n, seed);
        let op = ops[seed as usize % ops.len()];
        let expected = oracle_pa_per_node(&p, &values, op);
        for mode in [Mode::Det, Mode::Rand] {
            let mut sim = Simulator::new(&g);
            let out = pa_pipeline(&mut sim, &p, &values, op, mode, seed).unwrap();
            assert_eq!(out.values, expected, "seed {seed} {mode}");
        }
    }
}
