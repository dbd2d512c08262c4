use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UmeError};
use crate::graph::Graph;

/// Bidirectional 4-neighbour lattice plus `extra` random out-edges per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
    pub extra: usize,
    pub seed: u64,
}

/// Node `r * cols + c` sits at row `r`, column `c`. Extra edges go to
/// uniformly drawn nodes that are neither the node itself nor already an
/// out-neighbour. All costs are 1 and efficiencies 0.
pub fn grid_generate(config: &GridConfig) -> Result<Graph> {
    let GridConfig {
        rows,
        cols,
        extra,
        seed,
    } = *config;
    let n = rows * cols;
    if n == 0 {
        return Err(UmeError::InvalidParameter(
            "grid needs at least one row and column".into(),
        ));
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                out[v].push(v + 1);
                out[v + 1].push(v);
            }
            if r + 1 < rows {
                out[v].push(v + cols);
                out[v + cols].push(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (v, adj) in out.iter_mut().enumerate() {
        let free = n - 1 - adj.len();
        if extra > free {
            return Err(UmeError::InvalidParameter(format!(
                "node {v} has room for {free} extra edges, {extra} requested"
            )));
        }
        for _ in 0..extra {
            loop {
                let u = rng.random_range(0..n);
                if u != v && !adj.contains(&u) {
                    adj.push(u);
                    break;
                }
            }
        }
    }
    let mut arcs: Vec<(usize, usize, f64, f64)> = out
        .iter()
        .enumerate()
        .flat_map(|(v, adj)| adj.iter().map(move |&u| (v, u, 1.0, 0.0)))
        .collect();
    arcs.sort_by_key(|a| (a.0, a.1));
    Graph::new(n, arcs)
}
