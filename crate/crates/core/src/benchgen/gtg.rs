use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UmeError};
use crate::graph::Graph;

/// Multiplier on the unit-mean exponential node weights. Calibrated so that
/// `n = 100`, `theta = 30`, `alpha = 2` gives about 1600 directed edges.
pub const GTG_WEIGHT_SCALE: f64 = 1.018;

/// Geographical threshold graph: nodes uniform in the unit square with
/// random weights; `i` and `j` are joined in both directions when
/// `(w_i + w_j) / dist(i,j)^alpha >= theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtgConfig {
    pub n: usize,
    pub theta: f64,
    pub alpha: f64,
    pub weight_scale: f64,
    pub seed: u64,
}

impl GtgConfig {
    pub fn new(n: usize, theta: f64, seed: u64) -> Self {
        GtgConfig {
            n,
            theta,
            alpha: 2.0,
            weight_scale: GTG_WEIGHT_SCALE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(UmeError::InvalidParameter(format!(
                "GTG needs at least 2 nodes, got {}",
                self.n
            )));
        }
        if !(self.theta > 0.0) {
            return Err(UmeError::InvalidParameter(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(UmeError::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.weight_scale > 0.0) || !self.weight_scale.is_finite() {
            return Err(UmeError::InvalidParameter(format!(
                "weight scale must be positive, got {}",
                self.weight_scale
            )));
        }
        Ok(())
    }
}

/// Edge costs are Euclidean lengths; efficiencies are left at zero.
pub fn gtg_generate(config: &GtgConfig) -> Result<Graph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pos: Vec<(f64, f64)> = (0..config.n)
        .map(|_| (rng.random(), rng.random()))
        .collect();
    let weight: Vec<f64> = (0..config.n)
        .map(|_| {
            let x: f64 = Exp1.sample(&mut rng);
            x * config.weight_scale
        })
        .collect();
    Ok(threshold_graph(&pos, &weight, config.theta, config.alpha))
}

fn threshold_graph(pos: &[(f64, f64)], weight: &[f64], theta: f64, alpha: f64) -> Graph {
    let n = pos.len();
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dist = (pos[i].0 - pos[j].0).hypot(pos[i].1 - pos[j].1);
            if (weight[i] + weight[j]) >= theta * dist.powf(alpha) {
                arcs.push((i, j, dist));
            }
        }
    }
    let mut edges = Vec::with_capacity(2 * arcs.len());
    for (i, j, dist) in arcs {
        edges.push((i, j, dist, 0.0));
        edges.push((j, i, dist, 0.0));
    }
    edges.sort_by_key(|a| (a.0, a.1));
    Graph::new(n, edges).expect("threshold graph is simple")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_weights_connect_both_ways() {
        let g = threshold_graph(&[(0.0, 0.0), (1.0, 1.0)], &[1e9, 1e9], 30.0, 2.0);
        assert_eq!(g.edge_count(), 2);
        assert!((g.edges()[0].cost - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn infinite_threshold_is_empty() {
        let g = gtg_generate(&GtgConfig::new(50, f64::INFINITY, 1)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn deterministic_and_symmetric() {
        let a = gtg_generate(&GtgConfig::new(100, 30.0, 7)).unwrap();
        let b = gtg_generate(&GtgConfig::new(100, 30.0, 7)).unwrap();
        assert_eq!(a, b);
        for e in a.edges() {
            assert!(a.find_edge(e.head, e.tail).is_some());
        }
        let c = gtg_generate(&GtgConfig::new(100, 30.0, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(gtg_generate(&GtgConfig::new(1, 30.0, 0)).is_err());
        assert!(gtg_generate(&GtgConfig::new(10, 0.0, 0)).is_err());
        assert!(gtg_generate(&GtgConfig {
            alpha: -1.0,
            ..GtgConfig::new(10, 1.0, 0)
        })
        .is_err());
    }
}
