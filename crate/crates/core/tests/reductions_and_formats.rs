use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ume_core::benchgen::random::{random_instance, RandomConfig};
use ume_core::benchgen::{gtg_generate, make_instance, GtgConfig};
use ume_core::io::{
    instance_from_json, instance_to_json, node_problem_from_json, node_problem_to_json,
};
use ume_core::mip::{build_mip, check_mip_solution, export_mip, parse_lp, MipOptions};
use ume_core::transforms::{
    edge_problem_to_node_problem, node_problem_from_parts, node_problem_to_edge_problem,
};
use ume_core::{objective, EdgeId, InterdictionSet, NodeId, ProblemInstance};

fn instance(seed: u64, nodes: usize, acyclic: bool, budget: usize) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = RandomConfig {
        nodes,
        edge_probability: 0.3,
        evaders: 1 + (seed % 2) as usize,
        budget,
        acyclic,
        leaky: seed.is_multiple_of(3),
    };
    random_instance(&mut rng, &c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn edge_to_node_preserves_objective(seed in any::<u64>(), nodes in 3usize..9, acyclic in any::<bool>()) {
        let p = instance(seed, nodes, acyclic, 2);
        let (np, map) = edge_problem_to_node_problem(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let mut ids: Vec<usize> = (0..p.graph.edge_count()).collect();
        ids.shuffle(&mut rng);
        ids.truncate(rng.random_range(0..=ids.len()));
        let set = InterdictionSet::new(ids.iter().map(|&e| EdgeId::from(e))).unwrap();
        let nodes = map.edges_to_nodes(&set).unwrap();
        let a = objective(&p, &set).unwrap();
        let b = np.objective(&nodes).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        prop_assert_eq!(map.nodes_to_edges(&nodes).unwrap(), set);
    }

    #[test]
    fn node_to_edge_preserves_objective(seed in any::<u64>(), nodes in 3usize..9, acyclic in any::<bool>()) {
        let p = instance(seed, nodes, acyclic, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 11);
        let d: Vec<f64> = (0..p.graph.node_count()).map(|_| rng.random_range(0.0..=1.0)).collect();
        let np = node_problem_from_parts(p.graph.clone(), d, p.evaders.clone(), 1).unwrap();
        let (ep, map) = node_problem_to_edge_problem(&np).unwrap();
        let mut chosen: Vec<NodeId> = (0..p.graph.node_count()).map(NodeId::from).collect();
        chosen.shuffle(&mut rng);
        chosen.truncate(rng.random_range(0..=chosen.len()));
        let edges = map.node_set_to_edges(&chosen).unwrap();
        let a = np.objective(&chosen).unwrap();
        let b = objective(&ep, &edges).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        let mut back = map.edge_set_to_nodes(&edges).unwrap();
        back.sort();
        chosen.sort();
        prop_assert_eq!(back, chosen);
    }

    #[test]
    fn lp_text_round_trips(seed in any::<u64>(), nodes in 3usize..8, at_most in any::<bool>()) {
        let p = instance(seed, nodes, seed % 2 == 0, 1);
        let options = MipOptions { budget_at_most: at_most, pi_upper_bound: false };
        let model = build_mip(&p, options);
        let parsed = parse_lp(&export_mip(&p, options)).unwrap();
        prop_assert_eq!(parsed.canonical(), model.canonical());
        let size = model.size();
        let (k, n, e) = (p.evaders.len(), p.graph.node_count(), p.graph.edge_count());
        prop_assert_eq!((size.binaries, size.pi, size.theta), (e, k * n, k * e));
        prop_assert_eq!((size.flow, size.dominance, size.budget), (k * n, 2 * k * e, 1));
    }

    #[test]
    fn mip_point_is_feasible_and_h_plus_j_is_one(seed in any::<u64>(), nodes in 3usize..8) {
        let p = instance(seed, nodes, true, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 13);
        let mut r = vec![false; p.graph.edge_count()];
        let mut ids: Vec<usize> = (0..r.len()).collect();
        ids.shuffle(&mut rng);
        for &e in ids.iter().take(p.budget) {
            r[e] = true;
        }
        let check = check_mip_solution(&p, &r, 1e-8, MipOptions::default()).unwrap();
        prop_assert!(check.passed(), "{:?}", check.violations);
        prop_assert!((check.h + check.j - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>(), nodes in 3usize..9, acyclic in any::<bool>()) {
        let p = instance(seed, nodes, acyclic, 1);
        let text = instance_to_json(&p);
        let q = instance_from_json(&text).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(instance_to_json(&q), text);
    }
}

#[test]
fn model_instances_round_trip_through_json() {
    let g = gtg_generate(&GtgConfig::new(40, 8.0, 3)).unwrap();
    let p = make_instance(&g, 2, &[0.1, 1000.0], 0.5, 5, 3).unwrap();
    let text = instance_to_json(&p);
    assert!(text.contains("\"lambda\": 0.1"));
    assert_eq!(instance_from_json(&text).unwrap(), p);
}

#[test]
fn node_problem_bundle_round_trips() {
    let p = instance(4, 6, false, 1);
    let (np, map) = edge_problem_to_node_problem(&p).unwrap();
    let text = node_problem_to_json(&np, Some(map.clone()));
    let (back, back_map) = node_problem_from_json(&text).unwrap();
    assert_eq!(back, np);
    assert_eq!(back_map, Some(map));
}
