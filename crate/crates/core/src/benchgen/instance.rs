use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UmeError};
use crate::graph::{Graph, NodeId};
use crate::model::{EvaderSpec, ProblemInstance};

/// Target draws per evader before giving up.
pub const TARGET_RETRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceOptions {
    /// Overwrite every traversal cost with 1.
    pub unit_costs: bool,
    /// Spread source mass only over nodes that can reach the target.
    pub reachable_sources: bool,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        InstanceOptions {
            unit_costs: true,
            reachable_sources: true,
        }
    }
}

/// Benchmark instance on `graph`: unit costs, efficiency `d_uniform` on
/// every edge and one progress-model evader per entry of `lambdas`, each with
/// weight `1 / count`, its own random target and a uniform source over the
/// nodes that can reach that target.
pub fn make_instance(
    graph: &Graph,
    evader_count: usize,
    lambdas: &[f64],
    d_uniform: f64,
    budget: usize,
    seed: u64,
) -> Result<ProblemInstance> {
    make_instance_with(
        graph,
        evader_count,
        lambdas,
        d_uniform,
        budget,
        seed,
        InstanceOptions::default(),
    )
}

pub fn make_instance_with(
    graph: &Graph,
    evader_count: usize,
    lambdas: &[f64],
    d_uniform: f64,
    budget: usize,
    seed: u64,
    options: InstanceOptions,
) -> Result<ProblemInstance> {
    if evader_count != lambdas.len() {
        return Err(UmeError::InvalidParameter(format!(
            "{evader_count} evaders but {} lambdas",
            lambdas.len()
        )));
    }
    if evader_count == 0 {
        return Err(UmeError::InvalidParameter(
            "at least one evader is required".into(),
        ));
    }
    let mut g = graph.with_uniform_efficiency(d_uniform)?;
    if options.unit_costs {
        g = g.with_uniform_cost(1.0)?;
    }
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = 1.0 / evader_count as f64;
    let mut evaders = Vec::with_capacity(evader_count);
    for (k, &lambda) in lambdas.iter().enumerate() {
        let mut found = None;
        for _ in 0..TARGET_RETRIES {
            let t = NodeId::from(rng.random_range(0..n));
            let dist = g.distances_to(t)?;
            let reach: Vec<usize> = (0..n)
                .filter(|&i| i != t.index() && dist[i].is_finite())
                .collect();
            if !reach.is_empty() {
                found = Some((t, reach));
                break;
            }
        }
        let (target, reach) = found.ok_or_else(|| UmeError::InvalidEvader {
            index: k,
            reason: format!("no target reachable from another node after {TARGET_RETRIES} draws"),
        })?;
        let pool: Vec<usize> = if options.reachable_sources {
            reach
        } else {
            (0..n).filter(|&i| i != target.index()).collect()
        };
        let mut source = vec![0.0; n];
        let mass = 1.0 / pool.len() as f64;
        for i in pool {
            source[i] = mass;
        }
        evaders.push(EvaderSpec::from_model(&g, weight, source, target, lambda)?);
    }
    ProblemInstance::new(g, evaders, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchgen::{gtg_generate, GtgConfig};
    use crate::model::{objective, InterdictionSet};

    #[test]
    fn protocol_instance() {
        let g = gtg_generate(&GtgConfig::new(100, 30.0, 1)).unwrap();
        let p = make_instance(&g, 2, &[0.1, 1000.0], 0.5, 10, 1).unwrap();
        assert_eq!(p.evaders.len(), 2);
        assert!(p
            .graph
            .edges()
            .iter()
            .all(|e| e.cost == 1.0 && e.efficiency == 0.5));
        assert_eq!(p.evaders[0].weight, 0.5);
        assert!(p.unreachable_mass() == 0.0);
        assert!(objective(&p, &InterdictionSet::empty()).unwrap().abs() < 1e-12);
        assert_eq!(p, make_instance(&g, 2, &[0.1, 1000.0], 0.5, 10, 1).unwrap());
    }

    #[test]
    fn single_evader_on_chain() {
        let g = Graph::new(3, [(0, 1, 5.0, 0.0), (1, 2, 5.0, 0.0)]).unwrap();
        let p = make_instance(&g, 1, &[0.1], 0.5, 1, 4).unwrap();
        let ev = &p.evaders[0];
        assert_eq!(ev.target, NodeId(2));
        assert_eq!(ev.matrix.get(NodeId(0), NodeId(1)), 1.0);
    }

    #[test]
    fn zero_efficiency_has_no_effect() {
        let g = gtg_generate(&GtgConfig::new(30, 10.0, 2)).unwrap();
        let p = make_instance(&g, 2, &[0.1, 1000.0], 0.0, 3, 2).unwrap();
        let all = InterdictionSet::new((0..3).map(crate::graph::EdgeId::from)).unwrap();
        assert_eq!(
            objective(&p, &all).unwrap(),
            objective(&p, &InterdictionSet::empty()).unwrap()
        );
    }

    #[test]
    fn unrestricted_sources_leave_mass_stranded() {
        // node 3 is isolated
        let g = Graph::new(4, [(0, 1, 1.0, 0.0), (1, 2, 1.0, 0.0)]).unwrap();
        let opts = InstanceOptions {
            reachable_sources: false,
            ..Default::default()
        };
        let p = make_instance_with(&g, 1, &[1.0], 0.5, 1, 0, opts).unwrap();
        assert!(p.unreachable_mass() > 0.0);
    }

    #[test]
    fn errors() {
        let g = Graph::new(3, std::iter::empty()).unwrap();
        assert!(make_instance(&g, 1, &[1.0], 0.5, 0, 0).is_err());
        let g = Graph::new(2, [(0, 1, 1.0, 0.0)]).unwrap();
        assert!(make_instance(&g, 2, &[1.0], 0.5, 0, 0).is_err());
    }
}
