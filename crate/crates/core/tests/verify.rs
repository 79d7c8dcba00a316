use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pwagg::graph::{bfs_tree_oracle, gen_random_connected, gen_random_connected_partition, NetworkGraph, Partition};
use pwagg::pa::{verify_block_parameter, Mode, PaSetup};
use pwagg::shortcuts::{BlockStructure, Shortcut};
use pwagg::sim::{NodeId, Simulator};
use pwagg::subparts::{subpart_division_det, SubPartDivision};

fn leaders(p: &Partition) -> Vec<NodeId> {
    (0..p.num_parts()).map(|i| p.members(i)[0]).collect()
}

#[test]
fn large_budget_always_passes() {
    let g = gen_random_connected(80, 0.05, 2);
    let p = gen_random_connected_partition(&g, 4, 2).unwrap();
    let t = bfs_tree_oracle(&g, 0).unwrap();
    let mut sim = Simulator::new(&g);
    let (div, _) = subpart_division_det(&mut sim, &g, &p, t.height()).unwrap();
    let sc = Shortcut::empty(p.num_parts());
    let l = leaders(&p);
    let setup = PaSetup {
        tree: &t,
        partition: &p,
        leaders: &l,
        division: &div,
        shortcut: &sc,
        b: g.n(),
        mode: Mode::Det,
        seed: 0,
    };
    let v = verify_block_parameter(&mut sim, setup).unwrap();
    assert!(v.node_pass.iter().all(|&x| x));
}

#[test]
fn three_singleton_blocks_fail_budget_two() {
    let g = NetworkGraph::path(3);
    let p = Partition::whole(3);
    let t = bfs_tree_oracle(&g, 0).unwrap();
    let div = SubPartDivision::singletons(3);
    let sc = Shortcut::empty(1);
    let l = vec![0];
    for mode in [Mode::Det, Mode::Rand] {
        let setup = PaSetup {
            tree: &t,
            partition: &p,
            leaders: &l,
            division: &div,
            shortcut: &sc,
            b: 2,
            mode,
            seed: 1,
        };
        let mut sim = Simulator::new(&g);
        let v = verify_block_parameter(&mut sim, setup).unwrap();
        assert_eq!(v.node_pass, vec![false; 3]);
        let mut sim = Simulator::new(&g);
        let v = verify_block_parameter(&mut sim, PaSetup { b: 3, ..setup }).unwrap();
        assert_eq!(v.node_pass, vec![true; 3]);
    }
}

#[test]
fn verdicts_match_block_oracle() {
    for seed in 0..12u64 {
        let g = gen_random_connected(120, 0.04, seed);
        let p = gen_random_connected_partition(&g, 5, seed).unwrap();
        let t = bfs_tree_oracle(&g, 0).unwrap();
        let mut sim = Simulator::new(&g);
        let (div, _) = subpart_division_det(&mut sim, &g, &p, t.height().max(1)).unwrap();
        // Random subsets of tree edges near each part.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sets: Vec<Vec<NodeId>> = (0..p.num_parts())
            .map(|_| (1..g.n()).filter(|&v| v != t.root() && rng.gen_bool(0.3)).collect())
            .collect();
        let sc = Shortcut::from_sets(sets);
        let blocks = BlockStructure::compute(&t, &p, &sc);
        let l = leaders(&p);
        for b in 1..=6 {
            for mode in [Mode::Det, Mode::Rand] {
                let setup = PaSetup {
                    tree: &t,
                    partition: &p,
                    leaders: &l,
                    division: &div,
                    shortcut: &sc,
                    b,
                    mode,
                    seed,
                };
                let mut sim = Simulator::new(&g);
                let v = verify_block_parameter(&mut sim, setup).unwrap();
                for i in 0..p.num_parts() {
                    let reps = p.members(i).iter().copied().filter(|&x| div.is_rep(x));
                    let expect = blocks.count_hit(i, reps) <= b;
                    assert_eq!(v.part_pass[i], expect, "seed {seed} part {i} b {b}");
                    for &x in p.members(i) {
                        assert_eq!(v.node_pass[x], expect);
                    }
                }
            }
        }
    }
}
