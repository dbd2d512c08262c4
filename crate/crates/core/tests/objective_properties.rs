use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ume_core::benchgen::random::{random_instance, RandomConfig};
use ume_core::chain::apply_interdiction;
use ume_core::solvers::GreedyOptions;
use ume_core::{
    expected_visits, fast_init_gains, greedy_solve, marginal_gain, objective,
    path_objective_oracle, priority_greedy_solve, EdgeId, Evaluator, InterdictionSet,
    ProblemInstance,
};

fn instance(seed: u64, nodes: usize, acyclic: bool, leaky: bool, budget: usize) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = RandomConfig {
        nodes,
        edge_probability: 0.35,
        evaders: 1 + (seed % 3) as usize,
        budget,
        acyclic,
        leaky,
    };
    random_instance(&mut rng, &c).unwrap()
}

fn random_set(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..m).collect();
    all.shuffle(rng);
    all.truncate(k.min(m));
    all
}

fn set_of(ids: &[usize]) -> InterdictionSet {
    InterdictionSet::new(ids.iter().map(|&e| EdgeId::from(e))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn path_oracle_matches_linear_solve(seed in any::<u64>(), nodes in 3usize..9, leaky in any::<bool>()) {
        let p = instance(seed, nodes, true, leaky, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let k = rng.random_range(0..4);
        let s = set_of(&random_set(&mut rng, p.graph.edge_count(), k));
        let solved = objective(&p, &s).unwrap();
        let mut oracle = 0.0;
        for ev in &p.evaders {
            oracle += ev.weight * path_objective_oracle(ev, &s, &p.graph, 100_000).unwrap();
        }
        prop_assert!((solved - oracle).abs() <= 1e-10, "{solved} vs {oracle}");
    }

    #[test]
    fn monotone_and_submodular(seed in any::<u64>(), nodes in 3usize..9, acyclic in any::<bool>(), leaky in any::<bool>()) {
        let p = instance(seed, nodes, acyclic, leaky, 0);
        let eval = Evaluator::new(&p).unwrap();
        let m = p.graph.edge_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        for _ in 0..10 {
            let k = rng.random_range(0..=m);
            let big = random_set(&mut rng, m, k);
            let small: Vec<usize> = big.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            let outside: Vec<usize> = (0..m).filter(|e| !big.contains(e)).collect();
            let (s1, s2) = (set_of(&small), set_of(&big));
            prop_assert!(eval.objective(&s2).unwrap() >= eval.objective(&s1).unwrap() - 1e-12);
            if let Some(&x) = outside.choose(&mut rng) {
                let g1 = marginal_gain(&eval, &s1, EdgeId::from(x)).unwrap();
                let g2 = marginal_gain(&eval, &s2, EdgeId::from(x)).unwrap();
                prop_assert!(g2 >= -1e-12);
                prop_assert!(g1 >= g2 - 1e-9, "{g1} < {g2}");
            }
        }
    }

    #[test]
    fn interdiction_is_idempotent_and_order_free(seed in any::<u64>(), nodes in 3usize..9, acyclic in any::<bool>()) {
        let p = instance(seed, nodes, acyclic, false, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let ids = random_set(&mut rng, p.graph.edge_count(), 3);
        let mut reversed = ids.clone();
        reversed.reverse();
        let ev = &p.evaders[0];
        let a = apply_interdiction(&ev.matrix, &set_of(&ids), &p.graph).unwrap();
        let b = apply_interdiction(&ev.matrix, &set_of(&reversed), &p.graph).unwrap();
        prop_assert_eq!(&a, &b);
        // the set is applied to the original matrix, never compounded
        let again = apply_interdiction(&ev.matrix, &set_of(&ids), &p.graph).unwrap();
        prop_assert_eq!(&a, &again);
        prop_assert_eq!(objective(&p, &set_of(&ids)).unwrap(), objective(&p, &set_of(&reversed)).unwrap());
    }

    #[test]
    fn fast_init_is_exact_on_leak_free_acyclic_chains(seed in any::<u64>(), nodes in 3usize..10) {
        let p = instance(seed, nodes, true, false, 0);
        let eval = Evaluator::new(&p).unwrap();
        let fast = fast_init_gains(&eval).unwrap();
        for (e, g) in fast {
            let exact = marginal_gain(&eval, &InterdictionSet::empty(), e).unwrap();
            prop_assert!((g - exact).abs() <= 1e-12, "edge {e}: {g} vs {exact}");
        }
    }

    #[test]
    fn fast_init_bounds_gains_elsewhere(seed in any::<u64>(), nodes in 3usize..9, acyclic in any::<bool>(), leaky in any::<bool>()) {
        let p = instance(seed, nodes, acyclic, leaky, 0);
        let eval = Evaluator::new(&p).unwrap();
        for (e, g) in fast_init_gains(&eval).unwrap() {
            let exact = marginal_gain(&eval, &InterdictionSet::empty(), e).unwrap();
            prop_assert!(g >= exact - 1e-12);
            if eval.first_gain_is_exact(e) {
                prop_assert!((g - exact).abs() <= 1e-12, "edge {e}: {g} vs {exact}");
            }
        }
    }

    #[test]
    fn priority_matches_basic_greedy(seed in any::<u64>(), nodes in 3usize..10, acyclic in any::<bool>(), budget in 0usize..5) {
        let p = instance(seed, nodes, acyclic, seed % 3 == 0, budget);
        let basic = greedy_solve(&p, GreedyOptions::default()).unwrap();
        let lazy = priority_greedy_solve(&p, GreedyOptions::default()).unwrap();
        prop_assert_eq!(&lazy.selected, &basic.selected);
        prop_assert_eq!(lazy.objective, basic.objective);
        let (k, b, e) = (p.evaders.len() as u64, p.budget as u64, p.graph.edge_count() as u64);
        prop_assert_eq!(basic.eval_count, k * (b * e - b * b.saturating_sub(1) / 2));
    }
}

#[test]
fn full_cut_captures_everything() {
    for seed in 0..30 {
        let p = instance(seed, 7, seed % 2 == 0, false, 0);
        let g = p.graph.with_uniform_efficiency(1.0).unwrap();
        let cut = ProblemInstance {
            graph: g,
            ..p.clone()
        };
        let all = set_of(&(0..cut.graph.edge_count()).collect::<Vec<_>>());
        // source mass never sits on the target in these instances
        let j = objective(&cut, &all).unwrap();
        assert!((j - 1.0).abs() < 1e-12, "seed {seed}: {j}");
    }
}

#[test]
fn leak_free_acyclic_chain_always_arrives() {
    let p = instance(9, 6, true, false, 0);
    let ev = &p.evaders[0];
    let pi = expected_visits(&ev.source, &ev.matrix, p.tolerance).unwrap();
    assert!((pi[ev.target.index()] - 1.0).abs() < 1e-12);
}
